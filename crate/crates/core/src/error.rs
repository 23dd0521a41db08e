use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty history: all attribute counts are zero")]
    EmptyHistory,

    #[error("uninitialized attribute {0}: no samples drawn yet")]
    UninitializedAttribute(usize),

    #[error("unknown attribute {index} (oracle has {m} attributes)")]
    UnknownAttribute { index: usize, m: usize },

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("degenerate classifier: zero weight vector")]
    DegenerateClassifier,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("malformed pool file {path}: {reason}")]
    PoolFormat { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
