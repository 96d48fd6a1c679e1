use thiserror::Error;

/// Errors raised by the collocation, spectral and optimizer layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AskError {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate box in coordinate {index}: lower {lower} is not below upper {upper}")]
    DegenerateBox { index: usize, lower: f64, upper: f64 },

    #[error("dynamics returned a non-finite value at {point:?}")]
    NonFiniteDynamics { point: Vec<f64> },

    #[error("interpolation matrix is singular or ill-conditioned (cond = {cond:e})")]
    SingularBasis { cond: f64 },

    #[error("spectral system is ill-conditioned: {reason} ({value:e})")]
    IllConditioned { reason: &'static str, value: f64 },

    #[error("reconstructed state has imaginary residue {residue:e}")]
    NumericalNoise { residue: f64 },

    #[error("exponential overflow: max Re(lambda) * t = {exponent}")]
    Overflow { exponent: f64 },

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("problem `{0}` is not a min-max problem")]
    NotMinMax(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = AskError> = std::result::Result<T, E>;
