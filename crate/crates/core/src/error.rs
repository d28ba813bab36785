use thiserror::Error;

/// Errors raised by the solvers and post-processing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two profiles that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An iterative method hit its iteration cap.
    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A computed profile violates a structural invariant of the model.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// The discretized operator produced an unphysical result.
    #[error("discretization error: {0}")]
    Discretization(String),

    /// Malformed input data (too few points, inconsistent lengths).
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
