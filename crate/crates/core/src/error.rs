use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite component in input vector")]
    NonFinite,

    #[error("non-positive sample mass {0}")]
    NonPositiveMass(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("universe has no planets")]
    EmptyUniverse,

    #[error("planet index is empty")]
    EmptyIndex,

    #[error("planet id {0} is already indexed")]
    DuplicateId(u64),

    #[error("planet id {0} is not indexed")]
    UnknownId(u64),

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Dataset { path: PathBuf, message: String },

    #[error("{message}, row {row}")]
    Row { row: u64, message: String },

    #[error("invalid split: {0}")]
    Split(String),

    #[error("unsupported universe file version `{0}`")]
    Version(String),

    #[error("corrupt universe file at line {line}: {message}")]
    Corrupt { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
