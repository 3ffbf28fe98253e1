//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building models, sampling, or
/// aggregating an experiment.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector had the wrong length for the operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Bad argument values (unknown model name, inconsistent blocks, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The model does not support the requested operation
    /// (e.g. a sandwich check on a model without a block structure).
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// The log posterior was not finite at the chain's starting point.
    #[error("MCMC initialization failed: {0}")]
    Initialization(String),

    /// A chain accepted no proposal during the whole burn-in.
    #[error("MCMC adaptation failed: {0}")]
    AdaptationFailure(String),

    /// An estimator hit a non-finite value; the draw index is reported
    /// so the offending sample can be inspected.
    #[error("estimation failed at draw {draw}: {reason}")]
    Estimation { draw: usize, reason: String },

    /// The two-temperature solve was given identical temperatures.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// A Monte Carlo average of exp(-t K) underflowed to a non-positive
    /// value; raising the per-t sample count is the usual fix.
    #[error("numerical underflow: {0}")]
    Underflow(String),

    /// The regression design matrix was too close to singular.
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Too many replicates failed inside a run.
    #[error("experiment aborted: {0}")]
    Aborted(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
