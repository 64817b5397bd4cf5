use thiserror::Error;

/// Errors surfaced by construction and evaluation routines.
#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A stated precondition does not hold for the given inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A construction cannot be carried out (e.g. a doubling check fails).
    #[error("construction failed: {0}")]
    Construction(String),
    /// The operation was handed a representation it does not accept.
    #[error("dispatch error: {0}")]
    Dispatch(String),
    /// An iterative scheme failed to converge; the residual is reported.
    #[error("internal numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
