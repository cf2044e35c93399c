use thiserror::Error;

/// Errors raised by the solver crates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("wavevector k = 0 has no reduced basis (the mode family is stable by divergence)")]
    ZeroWavevector,

    #[error("mode violates admissibility: {0}")]
    InadmissibleMode(String),

    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(&'static str),

    #[error("matrix is singular ({0})")]
    Singular(&'static str),

    #[error("eigensolver failed to converge after {iterations} iterations ({context})")]
    EigenNoConvergence { iterations: usize, context: &'static str },

    #[error("fixed-point bisection did not converge: {trace}")]
    BisectionNoConvergence { trace: String },

    #[error("no bracket found: {0}")]
    NoBracket(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
