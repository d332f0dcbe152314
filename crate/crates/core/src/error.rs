use thiserror::Error;

/// Errors raised by the scalar, operator and state routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} is outside its domain (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("malformed matrix: {0}")]
    Malformed(String),

    #[error("density matrix has trace {0}, expected 1")]
    InvalidTrace(f64),

    #[error("density matrix is not faithful (smallest eigenvalue {0:e})")]
    NotFaithful(f64),

    #[error("direction is not centered: trace(rho K) = {0:e}")]
    NotCentered(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no counterexample found (best violation {best_violation:e})")]
    SearchExhausted { best_violation: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }

    /// True for errors that mean the inputs violate a modelling hypothesis
    /// (faithfulness, normalization, centering) rather than being malformed.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::InvalidTrace(_) | Error::NotFaithful(_) | Error::NotCentered(_)
        )
    }
}
