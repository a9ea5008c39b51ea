use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Ingested, Warning};
use crate::error::{Error, Result};

/// Leading point fields on every row: y x t sigma2 tau2 confidence.
const POINT_FIELDS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRow {
    /// 1-based frame number.
    pub frame: usize,
    pub descriptor: Vec<f64>,
}

/// Interest-point descriptors of one video.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSet {
    pub rows: Vec<DescriptorRow>,
    pub video_length_frames: usize,
}

impl DescriptorSet {
    pub fn new(rows: Vec<DescriptorRow>, video_length_frames: usize) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.descriptor.len());
        for (i, r) in rows.iter().enumerate() {
            if r.descriptor.len() != d {
                return Err(Error::Shape(format!("row {i} has {} values, expected {d}", r.descriptor.len())));
            }
            if r.frame == 0 || r.frame > video_length_frames {
                return Err(Error::Data(format!(
                    "row {i}: frame {} outside 1..={video_length_frames}",
                    r.frame
                )));
            }
        }
        Ok(Self {
            rows,
            video_length_frames,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Descriptor length, `None` when empty.
    pub fn descriptor_len(&self) -> Option<usize> {
        self.rows.first().map(|r| r.descriptor.len())
    }
}

pub fn parse_stip_file(path: impl AsRef<Path>) -> Result<Ingested<DescriptorSet>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_stip_str(&text, path)
}

/// Parses descriptor text; `origin` is only used in messages.
///
/// A comment `# video_length_frames N` fixes the video length; otherwise it is
/// the largest frame seen.
pub fn parse_stip_str(text: &str, origin: &Path) -> Result<Ingested<DescriptorSet>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rows = Vec::new();
    let mut declared: Option<(usize, usize)> = None;
    let mut width: Option<usize> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("video_length_frames") {
                let n = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or_else(|| err(line, "video_length_frames needs a non-negative integer".into()))?;
                declared = Some((n, line));
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let values = trimmed
            .split_whitespace()
            .enumerate()
            .map(|(col, w)| {
                w.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(line, format!("field {} is not a finite number: {w:?}", col + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() <= POINT_FIELDS {
            return Err(err(
                line,
                format!("expected {POINT_FIELDS} point fields and a descriptor, found {} fields", values.len()),
            ));
        }
        let d = values.len() - POINT_FIELDS;
        match width {
            Some(expected) if expected != d => {
                return Err(Error::DescriptorLength {
                    path: origin.to_path_buf(),
                    line,
                    expected,
                    found: d,
                })
            }
            _ => width = Some(d),
        }
        let t = values[2];
        if t.fract() != 0.0 || t < 1.0 {
            return Err(err(line, format!("frame t={t} is not a positive integer")));
        }
        rows.push(DescriptorRow {
            frame: t as usize,
            descriptor: values[POINT_FIELDS..].to_vec(),
        });
    }

    let max_frame = rows.iter().map(|r| r.frame).max().unwrap_or(0);
    let video_length_frames = match declared {
        Some((n, line)) if n < max_frame => {
            return Err(err(line, format!("video_length_frames {n} is below frame {max_frame}")));
        }
        Some((n, _)) => n,
        None => max_frame,
    };
    let mut warnings = Vec::new();
    if rows.is_empty() {
        warnings.push(Warning::EmptyDescriptorFile {
            path: PathBuf::from(origin),
        });
    }
    Ok(Ingested::new(
        DescriptorSet {
            rows,
            video_length_frames,
        },
        warnings,
    ))
}
