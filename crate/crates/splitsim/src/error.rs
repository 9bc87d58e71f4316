use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("length mismatch: expected {expected} elements, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error(
        "{sectors} sectors exceed the exhaustive-search guard of {max}; use the greedy method"
    )]
    TooManySectors { sectors: usize, max: usize },

    #[error("reference objective value is zero; percentage difference undefined")]
    ZeroReference,

    #[error("unsupported baseband function: {0}")]
    UnsupportedFunction(String),

    #[error("empty sweep range")]
    EmptyRange,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
