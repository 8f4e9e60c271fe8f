use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {lambda_min:e})")]
    NotPsd { lambda_min: f64 },

    #[error("matrix is not positive definite (min eigenvalue {lambda_min:e})")]
    NotPd { lambda_min: f64 },

    #[error("matrix violates S >= iJ (min eigenvalue of S - iJ is {defect:e})")]
    NotQuantumCovariance { defect: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid mode bipartition {m}:{l} for a {n}-mode matrix")]
    InvalidPartition { m: usize, l: usize, n: usize },

    #[error("cubic branch selection is ambiguous at z = {re}+{im}i")]
    BranchAmbiguity { re: f64, im: f64 },

    #[error("sweep consistency violated: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
