use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("{op}: no convergence after {iterations} iterations ({converged} of {total} converged)")]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        converged: usize,
        total: usize,
    },

    #[error("{op}: singular matrix")]
    Singular { op: &'static str },

    #[error("{op}: matrix is not positive definite")]
    NotPositiveDefinite { op: &'static str },

    #[error("coercivity: block {block} is linearly dependent")]
    DependentBlock { block: usize },

    #[error("fit: {0}")]
    Fit(String),

    #[error("schema: {0}")]
    Schema(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
