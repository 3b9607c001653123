//! Error type shared across the crate.

use thiserror::Error;

/// Errors reported by dataset ingestion, distance computations, and filters.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or precondition was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two inputs that must live in the same feature space do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Two empirical distributions that must have equal cardinality do not.
    #[error("cardinality mismatch: {left} vs {right} atoms")]
    CardinalityMismatch { left: usize, right: usize },

    /// The exact transport oracle only handles desk-scale inputs.
    #[error("input too large for the exact oracle: {size} atoms (limit {limit})")]
    SizeLimit { size: usize, limit: usize },

    /// A matrix cell is NaN or infinite. Coordinates are 0-based data
    /// coordinates (header rows are not counted).
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    /// A file could not be parsed as a numeric matrix.
    #[error("parse error in {path} at row {row}, column {col}: {message}")]
    Parse {
        path: String,
        row: usize,
        col: usize,
        message: String,
    },

    /// An I/O failure, annotated with the offending path.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
