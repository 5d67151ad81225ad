use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid hyperparameter law: {0}")]
    InvalidLaw(String),

    #[error("non-finite iterate produced at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    /// The iteration budget ran out. `best` is the iterate with the smallest residual.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<Complex64>,
    },

    #[error("singular denominator: {0}")]
    SingularDenominator(String),

    #[error("numerically singular shifted matrix: {0}")]
    SingularShift(String),

    #[error("law expectation produced a non-finite value at node {node}")]
    Evaluation { node: f64 },

    #[error("negative density {rho:e} at lambda = {lambda} (wrong branch)")]
    NegativeDensity { lambda: f64, rho: f64 },

    #[error("need at least {needed} converged grid points, found {found}")]
    InsufficientGrid { needed: usize, found: usize },

    #[error("density never exceeds threshold {threshold:e}")]
    NoSupportDetected { threshold: f64 },
}
