use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("cannot open {path}: {source}")]
    Open { path: PathBuf, source: io::Error },

    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount { line: u64, expected: usize, found: usize },

    #[error("duplicate dimension name `{0}`")]
    DuplicateDimension(String),

    #[error("dimension index {index} out of range for arity {arity}")]
    DimensionOutOfRange { index: usize, arity: usize },

    #[error("tuple arity {found} does not match {expected} hashed dimensions")]
    ArityMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot merge sketches: {0}")]
    Incompatible(String),

    #[error("empty sample: the multifractal model is undefined")]
    EmptySample,

    #[error("multifractal fit did not converge below depth {0}")]
    IterationCap(u32),

    #[error("out of memory while counting distinct tuples")]
    OutOfMemory,

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }
}
