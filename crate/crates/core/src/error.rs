use thiserror::Error;

/// Errors produced by the model, filter, stability, inference and evaluation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid transition matrix: {0}")]
    InvalidTransition(String),

    #[error("transition matrix is reducible or periodic; no unique stationary distribution")]
    ReducibleChain,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("variance must be strictly positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("mixture density underflowed to zero at observation {index}")]
    DegenerateFilter { index: usize },

    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("delta {0} outside (0, 0.5)")]
    InvalidDelta(f64),

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("griddy-Gibbs kernel for `{0}` has no mass on the grid")]
    DegenerateKernel(String),

    #[error("sampler failed in {failures} of {sweeps} sweeps (last error: {last})")]
    SamplerFailure {
        failures: usize,
        sweeps: usize,
        last: String,
    },

    #[error("need at least {needed} observations, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
