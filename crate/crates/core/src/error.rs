use alloc::string::String;

/// Errors produced by the solvers and evaluation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition of a closed-form result or check does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An iterative solve stopped before reaching its tolerance.
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    /// The grid oracle refuses instances where enumeration blows up.
    #[error("grid oracle supports at most 3 assets, got {0}")]
    TooManyAssets(usize),

    /// Two inputs that must agree in length do not.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
