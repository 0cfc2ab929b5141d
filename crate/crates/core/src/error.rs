//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, fitting, and data ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter value is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation received an empty sample where at least one point is required.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Two samples that must have matching shapes do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A sequence that must be nondecreasing is not.
    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),

    /// A duplicated design point carries two distinct fitted values.
    #[error("ambiguous fit: {0}")]
    AmbiguousFit(String),

    /// The operation is not defined for this noise kind.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The requested accuracy cannot be certified with the given settings.
    #[error("accuracy: {0}")]
    Accuracy(String),

    /// An integral over an infinite window does not converge.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// The characteristic function is too small inside the spectral cutoff.
    #[error("ill-posed inversion: {0}")]
    IllPosed(String),

    /// A non-finite value appeared during iteration.
    #[error("numeric failure at iteration {iteration}: {message}")]
    NumericFailure { iteration: usize, message: String },

    /// Invalid run configuration (bad flag combination, unknown name, ...).
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input data, with the offending 1-based line when known.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// I/O failure while reading or writing data files.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
