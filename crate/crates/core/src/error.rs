use std::io;

use thiserror::Error;

/// Errors produced anywhere in the tagging toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown POS tag `{0}`")]
    UnknownTag(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("sentence `{0}` is not fully tagged")]
    Untagged(String),

    #[error("mismatch at sentence `{sentence_id}`: {message}")]
    Mismatch {
        sentence_id: String,
        message: String,
    },

    #[error("empty result: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    pub(crate) fn shape(message: impl Into<String>) -> Self {
        Error::Shape(message.into())
    }
}
