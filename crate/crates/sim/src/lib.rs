//! Scenario files, trajectory CSV, metrics JSON, golden regression and the
//! `itsmc` command line for [`itsmc_core`].

use std::path::{Path, PathBuf};

pub mod config;
pub mod golden;
pub mod output;
pub mod runner;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] itsmc_core::Error),
    #[error("scenario file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("scenario file: {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("trajectory file: {0}")]
    Csv(#[from] csv::Error),
    #[error("trajectory file: {0}")]
    Trajectory(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SimError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for invalid input, 3 for a numeric blowup, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Core(e) if e.is_validation() => 2,
            SimError::Core(_) => 3,
            SimError::Toml(_) | SimError::Schema(_) => 2,
            _ => 1,
        }
    }
}
