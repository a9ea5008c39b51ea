use std::fmt::Write as _;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::stip::DescriptorSet;
use super::{Ingested, Warning};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::series::MultiTimeSeries;

/// Allowed cluster counts.
pub const K_GRID: [usize; 14] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 16, 18, 20];

pub const CODEBOOK_MAGIC: &str = "motion-codebook v1";

const MAX_ITER: usize = 300;
const TOLERANCE: f64 = 1e-10;

/// Descriptors from a trial known to be performed by an expert.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertSet {
    trial: String,
    set: DescriptorSet,
}

impl ExpertSet {
    /// Fails unless `expert` is set.
    pub fn new(trial: impl Into<String>, expert: bool, set: DescriptorSet) -> Result<Self> {
        let trial = trial.into();
        if !expert {
            return Err(Error::Data(format!("trial {trial} is not an expert trial")));
        }
        Ok(Self { trial, set })
    }

    pub fn trial(&self) -> &str {
        &self.trial
    }

    pub fn descriptors(&self) -> &DescriptorSet {
        &self.set
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub iterations: usize,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionCodebook {
    k: usize,
    d: usize,
    /// Row-major K×D.
    centroids: Vec<f64>,
    pub meta: TrainingMeta,
}

impl MotionCodebook {
    pub fn from_centroids(centroids: Vec<Vec<f64>>, meta: TrainingMeta) -> Result<Self> {
        let k = centroids.len();
        if !K_GRID.contains(&k) {
            return Err(Error::Parameter(format!("K={k} is not in the grid {K_GRID:?}")));
        }
        let d = centroids[0].len();
        if d == 0 || centroids.iter().any(|c| c.len() != d) {
            return Err(Error::Shape("centroids must share a non-zero length".into()));
        }
        if centroids.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite centroid".into()));
        }
        Ok(Self {
            k,
            d,
            centroids: centroids.concat(),
            meta,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.centroids[j * self.d..(j + 1) * self.d]
    }

    /// Index of the nearest centroid (squared Euclidean), lowest index on ties.
    pub fn nearest(&self, x: &[f64]) -> usize {
        nearest(&self.centroids, self.d, x).0
    }

    /// Text form:
    ///
    /// ```text
    /// motion-codebook v1
    /// k <K>
    /// d <D>
    /// seed <u64>
    /// iterations <n>
    /// inertia <f64>
    /// inertia_trace <f64> ...
    /// centroids
    /// <D values>        (K lines)
    /// ```
    ///
    /// Reals use the shortest representation that parses back exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{CODEBOOK_MAGIC}");
        let _ = writeln!(s, "k {}", self.k);
        let _ = writeln!(s, "d {}", self.d);
        let _ = writeln!(s, "seed {}", self.meta.seed);
        let _ = writeln!(s, "iterations {}", self.meta.iterations);
        let _ = writeln!(s, "inertia {}", self.meta.inertia);
        let _ = writeln!(s, "inertia_trace {}", join(&self.meta.inertia_trace));
        s.push_str("centroids\n");
        for j in 0..self.k {
            let _ = writeln!(s, "{}", join(self.centroid(j)));
        }
        s
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut next = |what: &str| lines.next().ok_or_else(|| err(0, format!("truncated before {what}")));

        let (line, magic) = next("header")?;
        if magic != CODEBOOK_MAGIC {
            return Err(err(line, format!("expected {CODEBOOK_MAGIC:?}, found {magic:?}")));
        }
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (line, l) = next(key)?;
            l.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' ').or(if rest.is_empty() { Some("") } else { None }))
                .map(|v| (line, v.to_string()))
                .ok_or_else(|| err(line, format!("expected field {key}")))
        };
        let num = |(line, v): (usize, String)| v.parse::<u64>().map_err(|e| err(line, e.to_string()));
        let k = num(field("k")?)? as usize;
        let d = num(field("d")?)? as usize;
        let seed = num(field("seed")?)?;
        let iterations = num(field("iterations")?)? as usize;
        let (l, v) = field("inertia")?;
        let inertia = reals(&v).map_err(|m| err(l, m))?;
        let (l, v) = field("inertia_trace")?;
        let inertia_trace = reals(&v).map_err(|m| err(l, m))?;
        let (l, v) = field("centroids")?;
        if !v.is_empty() || inertia.len() != 1 {
            return Err(err(l, "malformed header".into()));
        }
        let mut centroids = Vec::with_capacity(k);
        for _ in 0..k {
            let (line, row) = next("centroid row")?;
            let row = reals(row).map_err(|m| err(line, m))?;
            if row.len() != d {
                return Err(err(line, format!("expected {d} values, found {}", row.len())));
            }
            centroids.push(row);
        }
        MotionCodebook::from_centroids(
            centroids,
            TrainingMeta {
                seed,
                iterations,
                inertia: inertia[0],
                inertia_trace,
            },
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text, path)
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn reals(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split_whitespace()
        .map(|w| w.parse::<f64>().map_err(|e| format!("{w:?}: {e}")))
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// (index, squared distance) of the nearest row of a row-major matrix.
fn nearest(centroids: &[f64], d: usize, x: &[f64]) -> (usize, f64) {
    centroids
        .chunks_exact(d)
        .enumerate()
        .fold((0, f64::INFINITY), |best, (j, c)| {
            let dist = sq_dist(c, x);
            if dist < best.1 {
                (j, dist)
            } else {
                best
            }
        })
}

/// k-means over the pooled expert descriptors.
///
/// Seeding is k-means++; Lloyd iterations run until assignments stop
/// changing, the relative inertia drop falls below a tolerance, or the
/// iteration cap is hit. An empty cluster takes the point farthest from its
/// own centroid.
pub fn train_codebook(sets: &[ExpertSet], k: usize, seed: u64) -> Result<MotionCodebook> {
    if !K_GRID.contains(&k) {
        return Err(Error::Parameter(format!("K={k} is not in the grid {K_GRID:?}")));
    }
    let points: Vec<&[f64]> = sets
        .iter()
        .flat_map(|s| s.set.rows.iter().map(|r| r.descriptor.as_slice()))
        .collect();
    if points.len() < k {
        return Err(Error::Data(format!("{} descriptors cannot form {k} clusters", points.len())));
    }
    let d = points[0].len();
    if let Some(bad) = points.iter().position(|p| p.len() != d) {
        return Err(Error::Shape(format!("descriptor {bad} has length {}, expected {d}", points[bad].len())));
    }

    let mut rng = substream(seed, "kmeans++", k as u64);
    let mut centroids: Vec<f64> = Vec::with_capacity(k * d);
    centroids.extend_from_slice(points[rng.random_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[..d])).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            d2.iter()
                .position(|&w| {
                    acc += w;
                    acc > target
                })
                .unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap_or(0))
        } else {
            rng.random_range(0..points.len())
        };
        let start = centroids.len();
        centroids.extend_from_slice(points[pick]);
        for (w, p) in d2.iter_mut().zip(&points) {
            *w = w.min(sq_dist(p, &centroids[start..]));
        }
    }

    let mut assign = vec![usize::MAX; points.len()];
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        let mut inertia = 0.0;
        let mut dist = vec![0.0; points.len()];
        for (i, p) in points.iter().enumerate() {
            let (j, dd) = nearest(&centroids, d, p);
            changed |= assign[i] != j;
            assign[i] = j;
            dist[i] = dd;
            inertia += dd;
        }
        let converged = !changed
            || trace
                .last()
                .is_some_and(|&prev: &f64| prev - inertia <= TOLERANCE * prev.max(f64::MIN_POSITIVE));
        trace.push(inertia);
        if converged || iterations >= MAX_ITER {
            break;
        }

        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (p, &j) in points.iter().zip(&assign) {
            counts[j] += 1;
            for (s, v) in sums[j * d..(j + 1) * d].iter_mut().zip(*p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            // farthest point from its centroid among clusters that can spare one
            let far = (0..points.len())
                .filter(|&i| counts[assign[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                });
            let Some(i) = far else { continue };
            let from = assign[i];
            counts[from] -= 1;
            for (s, v) in sums[from * d..(from + 1) * d].iter_mut().zip(points[i]) {
                *s -= v;
            }
            counts[j] = 1;
            sums[j * d..(j + 1) * d].copy_from_slice(points[i]);
            assign[i] = j;
            dist[i] = 0.0;
        }
        for j in 0..k {
            if counts[j] > 0 {
                for (c, s) in centroids[j * d..(j + 1) * d].iter_mut().zip(&sums[j * d..(j + 1) * d]) {
                    *c = s / counts[j] as f64;
                }
            }
        }
    }

    log::debug!("k-means K={k}: {iterations} iterations, inertia {}", trace.last().unwrap_or(&0.0));
    Ok(MotionCodebook {
        k,
        d,
        centroids,
        meta: TrainingMeta {
            seed,
            iterations,
            inertia: *trace.last().unwrap_or(&0.0),
            inertia_trace: trace,
        },
    })
}

/// K×N per-frame counts of descriptors by nearest centroid.
pub fn encode_video(set: &DescriptorSet, codebook: &MotionCodebook) -> Result<Ingested<MultiTimeSeries<f64>>> {
    if let Some(dlen) = set.descriptor_len() {
        if dlen != codebook.d {
            return Err(Error::Shape(format!(
                "descriptor length {dlen} does not match codebook D={}",
                codebook.d
            )));
        }
    }
    let n = set.video_length_frames;
    let mut series = MultiTimeSeries::zeros(codebook.k, n)?;
    for r in &set.rows {
        if r.frame == 0 || r.frame > n {
            return Err(Error::Data(format!("frame {} outside 1..={n}", r.frame)));
        }
        let j = codebook.nearest(&r.descriptor);
        series.row_mut(j)[r.frame - 1] += 1.0;
    }
    let names = (0..codebook.k).map(|j| format!("m{j}")).collect();
    let series = series.with_dim_names(names)?;
    let warnings = if set.is_empty() {
        vec![Warning::EmptyVideo { frames: n }]
    } else {
        Vec::new()
    };
    Ok(Ingested::new(series, warnings))
}

#[cfg(test)]
mod tests {
    use super::super::stip::DescriptorRow;
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64, per: usize) -> DescriptorSet {
        let mut rng = substream(seed, "blobs", 0);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let rows = (0..2 * per)
            .map(|i| {
                let c = if i % 2 == 0 { [0.0, 0.0] } else { [10.0, -4.0] };
                DescriptorRow {
                    frame: i / 2 + 1,
                    descriptor: vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)],
                }
            })
            .collect();
        DescriptorSet::new(rows, per).unwrap()
    }

    fn experts(set: DescriptorSet) -> Vec<ExpertSet> {
        vec![ExpertSet::new("e1", true, set).unwrap()]
    }

    #[test]
    fn two_blobs_recovered() {
        let set = blobs(1, 200);
        let cb = train_codebook(&experts(set.clone()), 2, 7).unwrap();
        let mut cents = [cb.centroid(0).to_vec(), cb.centroid(1).to_vec()];
        cents.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!((cents[0][0]).abs() < 0.1 && (cents[0][1]).abs() < 0.1);
        assert!((cents[1][0] - 10.0).abs() < 0.1 && (cents[1][1] + 4.0).abs() < 0.1);
        // purity: each generated blob maps to a single cluster
        let a = cb.nearest(&set.rows[0].descriptor);
        for (i, r) in set.rows.iter().enumerate() {
            assert_eq!(cb.nearest(&r.descriptor) == a, i % 2 == 0);
        }
    }

    #[test]
    fn k_outside_grid_rejected() {
        for k in [0, 1, 11, 21] {
            assert!(matches!(train_codebook(&experts(blobs(1, 20)), k, 0), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn too_few_descriptors() {
        let set = blobs(1, 2);
        assert!(matches!(train_codebook(&experts(set), 5, 0), Err(Error::Data(_))));
    }

    #[test]
    fn non_expert_rejected() {
        assert!(ExpertSet::new("n1", false, DescriptorSet::default()).is_err());
    }

    #[test]
    fn deterministic_and_inertia_non_increasing() {
        let set = blobs(3, 150);
        for k in [2, 5, 12] {
            let a = train_codebook(&experts(set.clone()), k, 11).unwrap();
            let b = train_codebook(&experts(set.clone()), k, 11).unwrap();
            assert_eq!(a.to_text(), b.to_text());
            assert!(a.meta.inertia_trace.windows(2).all(|w| w[1] <= w[0]), "{:?}", a.meta.inertia_trace);
        }
    }

    #[test]
    fn duplicate_points_still_fill_every_cluster() {
        let mut rows: Vec<DescriptorRow> = (0..30)
            .map(|i| DescriptorRow {
                frame: 1,
                descriptor: vec![if i < 27 { 0.0 } else { i as f64 }],
            })
            .collect();
        rows.push(DescriptorRow {
            frame: 1,
            descriptor: vec![100.0],
        });
        let cb = train_codebook(&experts(DescriptorSet::new(rows, 1).unwrap()), 4, 0).unwrap();
        let mut c: Vec<f64> = (0..4).map(|j| cb.centroid(j)[0]).collect();
        c.sort_by(f64::total_cmp);
        c.dedup();
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let cb = train_codebook(&experts(blobs(5, 50)), 3, 2).unwrap();
        let text = cb.to_text();
        let back = MotionCodebook::from_text(&text, Path::new("cb.txt")).unwrap();
        assert_eq!(back, cb);
        assert_eq!(back.to_text(), text);
        let broken = text.replacen("motion-codebook v1", "motion-codebook v9", 1);
        assert!(MotionCodebook::from_text(&broken, Path::new("cb.txt")).is_err());
    }

    fn fixed_codebook() -> MotionCodebook {
        MotionCodebook::from_centroids(
            vec![vec![0.0, 0.0], vec![5.0, 0.0], vec![0.0, 5.0]],
            TrainingMeta {
                seed: 0,
                iterations: 0,
                inertia: 0.0,
                inertia_trace: vec![],
            },
        )
        .unwrap()
    }

    #[test]
    fn single_point_encoding() {
        let set = DescriptorSet::new(
            vec![DescriptorRow {
                frame: 5,
                descriptor: vec![0.2, 4.7],
            }],
            10,
        )
        .unwrap();
        let s = encode_video(&set, &fixed_codebook()).unwrap().value;
        assert_eq!((s.dims(), s.len()), (3, 10));
        for k in 0..3 {
            for n in 0..10 {
                let expected = if (k, n) == (2, 4) { 1.0 } else { 0.0 };
                assert_eq!(s.get(k, n), expected);
            }
        }
    }

    #[test]
    fn empty_video_encodes_zeros_with_warning() {
        let cb = MotionCodebook::from_centroids(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            fixed_codebook().meta,
        )
        .unwrap();
        let out = encode_video(&DescriptorSet::new(vec![], 100).unwrap(), &cb).unwrap();
        assert_eq!((out.value.dims(), out.value.len()), (4, 100));
        assert!(out.value.rows().flatten().all(|&v| v == 0.0));
        assert_eq!(out.warnings, vec![Warning::EmptyVideo { frames: 100 }]);
    }

    #[test]
    fn tie_goes_to_lowest_centroid() {
        assert_eq!(fixed_codebook().nearest(&[2.5, 0.0]), 0);
        assert_eq!(fixed_codebook().nearest(&[2.5, 2.5]), 0);
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let set = DescriptorSet::new(
            vec![DescriptorRow {
                frame: 1,
                descriptor: vec![1.0, 2.0, 3.0],
            }],
            1,
        )
        .unwrap();
        assert!(matches!(encode_video(&set, &fixed_codebook()), Err(Error::Shape(_))));
    }
}
