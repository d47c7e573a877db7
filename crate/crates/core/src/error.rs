use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A probability container failed validation (negative entries,
    /// wrong normalization, shape mismatch).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A scalar argument lies outside its admissible range.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// Array or alphabet dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A requested point is outside the achievable region.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The iterative solver produced a non-finite quantity.
    #[error("numerical failure at iteration {iteration}: {message}")]
    NumericalFailure { iteration: usize, message: String },

    /// An exhaustive-search instance exceeds the supported size.
    #[error("instance too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
