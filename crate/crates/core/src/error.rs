//! Error type shared by dataset handling, training and evaluation.

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An input value violated a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// Vector or matrix shapes do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A malformed record in an input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// File-level structure problems: wrong header, bad manifest, version skew.
    #[error("format error: {0}")]
    Format(String),

    /// A training step could not be completed.
    #[error("training error: {0}")]
    Training(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub fn dimension(message: impl Into<String>) -> Self {
        Error::Dimension(message.into())
    }

    pub fn format(message: impl Into<String>) -> Self {
        Error::Format(message.into())
    }

    pub fn training(message: impl Into<String>) -> Self {
        Error::Training(message.into())
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
