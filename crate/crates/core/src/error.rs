use std::path::PathBuf;

use thiserror::Error;

use crate::series::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: length {len}, need at least {required}")]
    TooShort { len: usize, required: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("series failed validation: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("dimension {dim}: {source}")]
    InDimension {
        dim: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension pair ({a}, {b}): {source}")]
    InPair {
        a: usize,
        b: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}:{line}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}:{line}: inconsistent descriptor length {found}, expected {expected}", .path.display())]
    DescriptorLength {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{}: data row {row}: {message}", .path.display())]
    CsvRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("class {class} is absent from the training part of fold {fold}")]
    Stratification { class: String, fold: usize },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
