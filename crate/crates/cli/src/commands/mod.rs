pub mod codebook;
pub mod evaluate;
pub mod featurize;
pub mod report;
pub mod synth;

use std::fmt::Display;

use motionskill::ingest::Manifest;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, InputConfig};
use crate::error::CliError;

/// A message attached to one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub trial: String,
    pub message: String,
}

impl Note {
    pub fn new(trial: &str, message: impl Display) -> Self {
        Self {
            trial: trial.to_string(),
            message: message.to_string(),
        }
    }
}

fn load_manifest(cfg: &ExperimentConfig) -> Result<Manifest, CliError> {
    match &cfg.input {
        InputConfig::Manifest { path } => Ok(Manifest::load(path)?),
        InputConfig::Synthetic { .. } => Err(CliError::Config("this command needs a manifest input".into())),
    }
}
