use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by chronotag.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid BIO sequence at position {position}: {message}")]
    InvalidBio { position: usize, message: String },

    #[error("overlapping spans: {first} and {second}")]
    Overlap { first: String, second: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model format version mismatch: file has {found}, expected {expected}")]
    VersionMismatch { found: String, expected: String },

    #[error("corrupted model file: {0}")]
    CorruptedModel(String),

    #[error("training aborted: {0}")]
    Training(String),

    #[error("unknown pipeline stage `{0}`")]
    UnknownStage(String),

    #[error("invalid rule `{id}`: {message}")]
    Rule { id: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
