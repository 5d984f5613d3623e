use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The scenario or the environment is malformed.
    #[error("schema error: {0}")]
    Schema(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] perturbex::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(_) | CliError::Write { .. } => 3,
        }
    }
}
