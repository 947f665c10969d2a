//! Experiment runners behind the `hdmd` binary.

pub mod config;
mod output;
mod run;

use std::path::PathBuf;

use hdmd::HdmdError;
use thiserror::Error;

pub use config::ExperimentConfig;
pub use run::{run_custom, run_probes, run_schrodinger, RunOptions};

/// Runs fail loudly when `‖GK − K*G‖_F / max(1, ‖GK‖_F)` exceeds this.
pub const HERMITICITY_LIMIT: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Input(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<HdmdError> for CliError {
    fn from(e: HdmdError) -> Self {
        match e {
            HdmdError::ZeroRank | HdmdError::NoConvergence(_) | HdmdError::WrongKind(_) | HdmdError::GramMismatch => {
                CliError::Numerical(e.to_string())
            }
            HdmdError::Io(source) => CliError::Io {
                path: PathBuf::new(),
                source,
            },
            other => CliError::Input(other.to_string()),
        }
    }
}
