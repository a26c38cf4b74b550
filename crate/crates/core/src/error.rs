use thiserror::Error;

/// Failures raised by the numeric kernel, the lattice and the transition layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not idempotent (residual {residual:.3e})")]
    NotIdempotent { residual: f64 },

    #[error("operation requires a nonzero projection")]
    ZeroProjection,

    #[error("cannot condition on an event of probability {probability:.3e}")]
    ConditioningOnNull { probability: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("certificate verification failed at step {step}: {reason}")]
    Certificate { step: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
