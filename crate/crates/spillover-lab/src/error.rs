//! Error type shared across the crate.
//!
//! Every fallible operation returns [`Error`] with enough context to name the
//! offending unit, line, or parameter. Numerical failures (non-positive-definite
//! precision, solver residuals out of tolerance) are reported rather than
//! silently clamped.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter was outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two arguments had incompatible dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An edge-list file failed to parse; `line` is 1-based.
    #[error("edge list line {line}: {message}")]
    EdgeList { line: usize, message: String },

    /// A probability left [0, 1] where it must not.
    #[error("probability out of range: {0}")]
    ProbabilityOutOfRange(String),

    /// A positivity requirement failed (some unit cannot attain the level).
    #[error("positivity violation: unit {unit} has zero probability of exposure level {level}")]
    PositivityViolation { unit: usize, level: String },

    /// An estimator had no units at the requested level or an empty cell.
    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    /// A linear solve or factorization failed or left too large a residual.
    #[error("linear solve failure: {0}")]
    SolveFailure(String),

    /// A model fit did not converge or the design matrix was degenerate.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// Exhaustive enumeration was requested beyond the hard cap.
    #[error("enumeration over {requested} units exceeds the cap of {cap}")]
    EnumerationCap { requested: usize, cap: usize },

    /// Integer overflow in an exact combinatorial computation.
    #[error("integer overflow: {0}")]
    Overflow(String),

    /// Configuration file problems (unknown keys, bad values, missing fields).
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
