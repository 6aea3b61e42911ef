use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] brusselator::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("metadata {path}: {reason}")]
    Meta { path: PathBuf, reason: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 ok, 1 I/O, 2 usage or validation, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) | CliError::Meta { .. } => 2,
            CliError::Model(e) if e.is_numerical() || *e == brusselator::Error::FlatSeries => 3,
            CliError::Model(_) => 2,
        }
    }
}
