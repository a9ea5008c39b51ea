use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: String,
        #[source]
        source: motionskill::Error,
    },

    #[error(transparent)]
    Core(#[from] motionskill::Error),

    /// Some trials failed; partial outputs were still written.
    #[error("{failed} of {total} trials failed")]
    Partial { failed: usize, total: usize },

    #[error("{0} check(s) failed")]
    Check(usize),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const DATA: u8 = 3;
    pub const CHECK: u8 = 4;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Core(motionskill::Error::Parameter(_)) => Self::CONFIG,
            CliError::Trial { .. } | CliError::Core(_) | CliError::Partial { .. } => Self::DATA,
            CliError::Check(_) => Self::CHECK,
            CliError::Io { .. } => Self::OTHER,
        }
    }

    pub fn trial(trial: &str) -> impl FnOnce(motionskill::Error) -> CliError + '_ {
        move |source| CliError::Trial {
            trial: trial.to_string(),
            source,
        }
    }
}
