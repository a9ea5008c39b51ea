//! Reading external data into series: interest-point descriptor files,
//! motion codebooks, accelerometer CSVs and trial manifests.

mod accel;
mod codebook;
mod manifest;
mod stip;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use accel::{combine_accel, parse_accel_csv, read_accel_csv, single_accel, AccelOptions, AccelTrace, SensorId};
pub use codebook::{encode_video, train_codebook, ExpertSet, MotionCodebook, TrainingMeta, CODEBOOK_MAGIC, K_GRID};
pub use manifest::{Manifest, Trial};
pub use stip::{parse_stip_file, parse_stip_str, DescriptorRow, DescriptorSet};

use crate::features::{FeatureVector, Modality};

/// Non-fatal conditions noticed while ingesting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    EmptyDescriptorFile { path: PathBuf },
    EmptyVideo { frames: usize },
    Truncated { len_a: usize, len_b: usize, kept: usize },
    AmplitudeSpike {
        sensor: SensorId,
        samples: usize,
        max_magnitude: f64,
        threshold: f64,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::EmptyDescriptorFile { path } => write!(f, "{}: no descriptor rows", path.display()),
            Warning::EmptyVideo { frames } => write!(f, "no descriptors; encoded {frames} empty frames"),
            Warning::Truncated { len_a, len_b, kept } => {
                write!(f, "accelerometer lengths {len_a} and {len_b} differ; truncated to {kept}")
            }
            Warning::AmplitudeSpike {
                sensor,
                samples,
                max_magnitude,
                threshold,
            } => write!(
                f,
                "{sensor}: {samples} samples exceed magnitude {threshold} (max {max_magnitude})"
            ),
        }
    }
}

/// A value plus the warnings raised while producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested<V> {
    pub value: V,
    pub warnings: Vec<Warning>,
}

impl<V> Ingested<V> {
    pub(crate) fn new(value: V, warnings: Vec<Warning>) -> Self {
        for w in &warnings {
            log::warn!("{w}");
        }
        Self { value, warnings }
    }
}

/// Concatenates video and accelerometer features, tagging each side with its modality.
pub fn early_fuse(video: FeatureVector<f64>, accel: FeatureVector<f64>) -> FeatureVector<f64> {
    video
        .with_modality(Modality::Video)
        .concat(accel.with_modality(Modality::Accel))
}
