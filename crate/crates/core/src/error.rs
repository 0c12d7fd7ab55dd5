use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: invalid UTF-8 at byte offset {offset} (line {line})", path.display())]
    Utf8 { path: PathBuf, line: usize, offset: u64 },

    #[error("{what}: length mismatch ({left} vs {right})")]
    LengthMismatch { what: String, left: usize, right: usize },

    #[error("{}:{line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub fn mismatch(what: impl Into<String>, left: usize, right: usize) -> Self {
        Error::LengthMismatch {
            what: what.into(),
            left,
            right,
        }
    }
}
