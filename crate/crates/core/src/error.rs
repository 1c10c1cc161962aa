use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the detection pipeline and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate minimal sample: {0}")]
    DegenerateSample(&'static str),

    #[error("model pool exhausted after {attempts} consecutive degenerate draws")]
    PoolExhausted { attempts: usize },

    #[error("dataset has {got} points but the model family needs {needed}")]
    InsufficientData { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ROC AUC needs both classes, labels are all {0}")]
    SingleClass(&'static str),

    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("I/O failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the filesystem rather than by the input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
