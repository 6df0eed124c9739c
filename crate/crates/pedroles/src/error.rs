//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by corpus loading, model fitting, and report generation.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data (files, annotations, vectors).
    #[error("{0}")]
    Input(String),

    /// Invalid parameters or parameter/data combinations.
    #[error("{0}")]
    Config(String),

    /// Filesystem failure while reading or writing `path`.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Unexpected internal failure.
    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 2 input, 3 configuration, 4 internal.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Input(_) | Error::Io { .. } => 2,
            Error::Config(_) => 3,
            Error::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
