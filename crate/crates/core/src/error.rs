use thiserror::Error;

/// Errors raised by the solver core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("ill-posed operation: {0}")]
    IllPosed(String),

    #[error("rho = {rho} lies within {distance:e} of the Dirac eigenvalue {eigenvalue}")]
    SpectralGap {
        rho: f64,
        eigenvalue: f64,
        distance: f64,
    },

    #[error("overflow guard tripped: max|u| = {max_abs_u} exceeds cap {cap}")]
    Domain { max_abs_u: f64, cap: f64 },

    #[error("iterative solve did not converge after {iterations} iterations (residual {residual:e})")]
    Conditioning { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;
