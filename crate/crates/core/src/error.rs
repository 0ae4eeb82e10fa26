use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate tweet id {0:?}")]
    DuplicateId(String),

    #[error("line {line}: missing required field {field:?}")]
    MissingField { line: usize, field: &'static str },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("annotation references unknown tweet id {0:?}")]
    UnknownTweet(String),

    #[error("tweet {tweet_id:?} has {count} annotations; at most 2 are supported")]
    TooManyAnnotations { tweet_id: String, count: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feature index {index} out of range for vocabulary of size {size}")]
    FeatureOutOfRange { index: usize, size: usize },

    #[error("corrupt model artifact: {0}")]
    CorruptModel(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("model kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("scheme mismatch: dataset uses {dataset}, requested {requested}")]
    SchemeMismatch {
        dataset: &'static str,
        requested: &'static str,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
