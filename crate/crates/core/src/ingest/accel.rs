use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Ingested, Warning};
use crate::error::{Error, Result};
use crate::series::MultiTimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorId {
    Wrist,
    NeedleHolder,
    LeftWrist,
    RightWrist,
}

impl SensorId {
    pub fn as_str(self) -> &'static str {
        match self {
            SensorId::Wrist => "wrist",
            SensorId::NeedleHolder => "needle_holder",
            SensorId::LeftWrist => "left_wrist",
            SensorId::RightWrist => "right_wrist",
        }
    }
}

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SensorId::Wrist, SensorId::NeedleHolder, SensorId::LeftWrist, SensorId::RightWrist]
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown sensor {s:?}")))
    }
}

/// One accelerometer: a 3×Q series with rows x, y, z.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelTrace {
    pub samples: MultiTimeSeries<f64>,
    pub sensor_id: SensorId,
    pub sample_rate: f64,
}

impl AccelTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelOptions {
    pub sensor: SensorId,
    /// Warn when the acceleration magnitude exceeds this; `None` disables the check.
    pub spike_threshold: Option<f64>,
}

impl AccelOptions {
    /// 16 g in m/s².
    pub const DEFAULT_SPIKE: f64 = 156.9064;

    pub fn new(sensor: SensorId) -> Self {
        Self {
            sensor,
            spike_threshold: Some(Self::DEFAULT_SPIKE),
        }
    }
}

pub fn parse_accel_csv(path: impl AsRef<Path>, options: AccelOptions) -> Result<Ingested<AccelTrace>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_accel_csv(file, path, options)
}

/// Reads `timestamp,x,y,z` CSV (timestamps in seconds, strictly increasing).
/// Row numbers in errors count data rows from 1.
pub fn read_accel_csv<R: Read>(reader: R, origin: &Path, options: AccelOptions) -> Result<Ingested<AccelTrace>> {
    let row_err = |row: usize, message: String| Error::CsvRow {
        path: origin.to_path_buf(),
        row,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != ["timestamp", "x", "y", "z"] {
        return Err(Error::Parse {
            path: origin.to_path_buf(),
            line: 1,
            message: format!("header must be timestamp,x,y,z, found {:?}", header.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut times = Vec::new();
    let mut xyz: [Vec<f64>; 3] = Default::default();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| row_err(row, e.to_string()))?;
        if rec.len() != 4 {
            return Err(row_err(row, format!("expected 4 fields, found {}", rec.len())));
        }
        let mut vals = [0.0; 4];
        for (j, cell) in rec.iter().enumerate() {
            vals[j] = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| row_err(row, format!("column {} is not a finite number: {cell:?}", j + 1)))?;
        }
        if let Some(&prev) = times.last() {
            if vals[0] <= prev {
                return Err(row_err(row, format!("timestamp {} does not increase past {prev}", vals[0])));
            }
        }
        times.push(vals[0]);
        for (axis, v) in xyz.iter_mut().zip(&vals[1..]) {
            axis.push(*v);
        }
    }
    if times.len() < 2 {
        return Err(Error::Data(format!(
            "{}: need at least 2 samples, found {}",
            origin.display(),
            times.len()
        )));
    }

    let mut deltas: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    deltas.sort_by(f64::total_cmp);
    let mid = deltas.len() / 2;
    let median = if deltas.len() % 2 == 1 {
        deltas[mid]
    } else {
        (deltas[mid - 1] + deltas[mid]) / 2.0
    };
    let sample_rate = 1.0 / median;

    let mut warnings = Vec::new();
    if let Some(threshold) = options.spike_threshold {
        let mags: Vec<f64> = (0..times.len())
            .map(|t| (xyz[0][t].powi(2) + xyz[1][t].powi(2) + xyz[2][t].powi(2)).sqrt())
            .collect();
        let over = mags.iter().filter(|&&m| m > threshold).count();
        if over > 0 {
            warnings.push(Warning::AmplitudeSpike {
                sensor: options.sensor,
                samples: over,
                max_magnitude: mags.iter().copied().fold(0.0, f64::max),
                threshold,
            });
        }
    }

    let samples = MultiTimeSeries::from_rows(xyz.into())?
        .with_dim_names(["x", "y", "z"].map(|a| format!("{}.{a}", options.sensor)).to_vec())?
        .with_sample_rate(sample_rate);
    Ok(Ingested::new(
        AccelTrace {
            samples,
            sensor_id: options.sensor,
            sample_rate,
        },
        warnings,
    ))
}

/// 6×Q series `[a.x, a.y, a.z, b.x, b.y, b.z]`, truncated to the shorter trace.
pub fn combine_accel(a: &AccelTrace, b: &AccelTrace) -> Result<Ingested<MultiTimeSeries<f64>>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Data("cannot combine an empty accelerometer trace".into()));
    }
    let q = a.len().min(b.len());
    let combined = a.samples.truncated(q)?.stack(&b.samples.truncated(q)?)?;
    let warnings = if a.len() != b.len() {
        vec![Warning::Truncated {
            len_a: a.len(),
            len_b: b.len(),
            kept: q,
        }]
    } else {
        Vec::new()
    };
    Ok(Ingested::new(combined, warnings))
}

/// Single-sensor analysis: the 3×Q series unchanged.
pub fn single_accel(a: &AccelTrace) -> MultiTimeSeries<f64> {
    a.samples.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{validate, EntropyParams};

    fn read(text: &str) -> Result<Ingested<AccelTrace>> {
        read_accel_csv(text.as_bytes(), Path::new("a.csv"), AccelOptions::new(SensorId::LeftWrist))
    }

    fn trace(q: usize, sensor: SensorId) -> AccelTrace {
        let mut text = String::from("timestamp,x,y,z\n");
        for t in 0..q {
            text.push_str(&format!("{},{},{},{}\n", t as f64 * 0.01, t, (t * 7) % 5, 9.81));
        }
        read_accel_csv(text.as_bytes(), Path::new("a.csv"), AccelOptions::new(sensor))
            .unwrap()
            .value
    }

    #[test]
    fn four_rows() {
        let tr = read("timestamp,x,y,z\n0,1,2,3\n0.5,1,2,3\n1.0,1,2,3\n1.5,4,5,6\n").unwrap().value;
        assert_eq!((tr.samples.dims(), tr.samples.len()), (3, 4));
        assert_eq!(tr.samples.column(3), vec![4.0, 5.0, 6.0]);
        assert!((tr.sample_rate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_timestamp_reports_row_3() {
        let err = read("timestamp,x,y,z\n0,1,1,1\n1,1,1,1\n1,1,1,1\n2,1,1,1\n").unwrap_err();
        assert!(matches!(err, Error::CsvRow { row: 3, .. }), "{err}");
    }

    #[test]
    fn non_numeric_cell_reports_row() {
        let err = read("timestamp,x,y,z\n0,1,1,1\n1,a,1,1\n").unwrap_err();
        assert!(matches!(err, Error::CsvRow { row: 2, .. }));
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(matches!(read("t,x,y,z\n0,1,1,1\n1,1,1,1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn hundred_hz_rate() {
        let tr = trace(500, SensorId::Wrist);
        assert!((tr.sample_rate / 100.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn spike_warning_never_drops_samples() {
        let out = read("timestamp,x,y,z\n0,1,1,1\n1,400,0,0\n2,1,1,1\n").unwrap();
        assert_eq!(out.value.len(), 3);
        assert!(matches!(out.warnings[..], [Warning::AmplitudeSpike { samples: 1, .. }]));
    }

    #[test]
    fn combine_truncates_with_warning() {
        let out = combine_accel(&trace(100, SensorId::LeftWrist), &trace(98, SensorId::RightWrist)).unwrap();
        assert_eq!((out.value.dims(), out.value.len()), (6, 98));
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.value.dim_names()[3], "right_wrist.x");
    }

    #[test]
    fn identical_traces_repeat_rows() {
        let t = trace(50, SensorId::Wrist);
        let s = combine_accel(&t, &t).unwrap();
        assert!(s.warnings.is_empty());
        for d in 0..3 {
            assert_eq!(s.value.row(d), s.value.row(d + 3));
        }
    }

    #[test]
    fn single_sensor_passthrough_and_validity() {
        let t = trace(3, SensorId::NeedleHolder);
        assert_eq!(single_accel(&t).dims(), 3);
        let params = EntropyParams::<f64>::new(1, 1, vec![0.2], vec![0.2]).unwrap();
        assert!(validate(&combine_accel(&t, &t).unwrap().value, &params).is_ok());
    }
}
