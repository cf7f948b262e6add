use std::path::PathBuf;

use irradiance_core::pipeline::{Stage, StageError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Stage(#[from] StageError),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Stage(e) => match e.stage {
                Stage::Ingest => 2,
                Stage::Smoothing => 3,
                Stage::Fit => 4,
                Stage::Trends => 5,
                Stage::Maps => 6,
                Stage::Model => 7,
                Stage::Simulation => 8,
                Stage::Pv => 9,
                Stage::Validation => 10,
                Stage::Plot => 11,
            },
            CliError::Usage(_) | CliError::Config { .. } => 64,
            CliError::Io { .. } => 74,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn stage(stage: Stage, source: irradiance_core::Error) -> Self {
        CliError::Stage(StageError { stage, source })
    }
}
