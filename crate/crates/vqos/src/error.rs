//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VqosError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("codec error: {0}")]
    Codec(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl VqosError {
    pub fn shape(msg: impl Into<String>) -> Self {
        VqosError::Shape(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        VqosError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, VqosError>;
