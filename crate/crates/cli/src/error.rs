use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] bungee_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Config { path: PathBuf, source: serde_json::Error },

    #[error("numerical failure: {0}")]
    NotConverged(String),

    #[error("fixture mismatch: {0}")]
    FixtureMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use bungee_core::Error as E;
        match self {
            Self::Usage(_) | Self::Io { .. } | Self::Config { .. } => 1,
            Self::Core(E::NotConverged { .. } | E::NotARoot { .. }) | Self::NotConverged(_) => 2,
            Self::Core(_) => 1,
            Self::FixtureMismatch(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
