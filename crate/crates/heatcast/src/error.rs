//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input data, reported with a 1-based line number.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A value or argument outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A cell id (or similar key) that does not exist in the data.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// The stacked design cannot be constructed from the given tables.
    #[error("design error: {0}")]
    Design(String),

    /// Case-weighting preconditions violated.
    #[error("weighting error: {0}")]
    Weighting(String),

    /// Forest training preconditions violated.
    #[error("training error: {0}")]
    Training(String),

    /// Model (de)serialization failure.
    #[error("model format error: {0}")]
    ModelFormat(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
