use crate::channel::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular input: {0}")]
    Singular(String),

    #[error("Hermitian eigensolver did not converge (matrix hash {hash:016x}, dim {dim})")]
    EigenFailure { hash: u64, dim: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("channel validation failed:\n{0}")]
    Validation(ValidationReport),

    #[error(
        "inner fixed-point solver stopped after {iterations} iterations with certified bound {bound:e} (> tol {tol:e})"
    )]
    InnerNotConverged { iterations: usize, bound: f64, tol: f64 },

    #[error(
        "line search at iteration {iteration} exceeded depth {depth}; the gradient is inconsistent or epsilon is zero"
    )]
    LineSearch { iteration: usize, depth: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::Singular(msg.into())
    }
}
