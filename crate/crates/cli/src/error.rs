use std::path::PathBuf;

use sshg_core::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("output serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for capacity limits, 1 otherwise.
    /// Flagged (non-converged) runs are not errors; see [`crate::run::RunOutput::exit_code`].
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Solver(SolverError::Config(_) | SolverError::SpectralGap { .. } | SolverError::Precondition(_)) => 2,
            CliError::Solver(SolverError::Capacity(_)) => 3,
            _ => 1,
        }
    }
}
