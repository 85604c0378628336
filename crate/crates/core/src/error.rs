use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point {x} lies outside [{a}, {b}]")]
    OutOfRange { x: f64, a: f64, b: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("contour resolution failed: {0}")]
    ContourResolution(String),
    #[error("zero drift undefined: {0}")]
    DriftUndefined(String),
    #[error("no eigenvalues found in [{lo}, {hi}]")]
    EmptyReport { lo: f64, hi: f64 },
}

pub type Result<T, E = SlError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> SlError {
    SlError::InvalidInput(msg.into())
}
