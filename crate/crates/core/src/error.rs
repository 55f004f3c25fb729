use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence `{id}`: length {len} is too short (need at least 2 values)")]
    TooShort { id: String, len: usize },

    #[error("sequence `{id}`: value {value} at position {index} is negative or not finite")]
    InvalidValue { id: String, index: usize, value: f64 },

    #[error("sequence `{id}`: all values are zero")]
    AllZero { id: String },

    #[error("invalid step density: {0}")]
    InvalidDensity(String),

    #[error("moment order must be at least 1")]
    ZeroMomentOrder,

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("cut size {k} is out of range for {m} leaves")]
    CutOutOfRange { k: usize, m: usize },

    #[error("dendrogram is malformed: {0}")]
    InvalidDendrogram(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid synthetic data configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input data or unreadable files, as
    /// opposed to failures inside a computation stage.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::TooShort { .. }
                | Error::InvalidValue { .. }
                | Error::AllZero { .. }
                | Error::DuplicateLabel(_)
                | Error::Parse { .. }
                | Error::Io { .. }
        )
    }
}
