use thiserror::Error;

/// Errors raised by operator construction, filtering and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: operator acts on {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not symmetric: entry ({row}, {col}) differs from its transpose by {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("non-finite value after filter substep {substep}")]
    NonFinite { substep: usize },

    #[error("unstable time step: stability margin {margin:.4} (needs > 1)")]
    Unstable { margin: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix of dimension {n} exceeds the brute-force cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("error-decay fit unavailable: {0}")]
    FitUnavailable(String),

    #[error("iteration does not converge at this peak: ratio {ratio} >= 1")]
    NonConvergent { ratio: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
