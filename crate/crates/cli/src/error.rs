use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("cannot access {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Core(#[from] qlattice_core::Error),
    #[error("{0}")]
    Verification(String),
    #[error("{failed} of {total} property checks failed")]
    SuiteFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            reason: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Parameter(_) | CliError::Core(_) | CliError::Verification(_) => 1,
            CliError::SuiteFailed { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        use qlattice_core::Error as E;
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Io { .. } => "io",
            CliError::Parameter(_) => "parameter",
            CliError::Verification(_) => "verification",
            CliError::SuiteFailed { .. } => "suite_failure",
            CliError::Core(e) => match e {
                E::Shape(_) => "shape",
                E::Domain(_) => "domain",
                E::NotHermitian { .. } => "not_hermitian",
                E::NotIdempotent { .. } => "not_idempotent",
                E::ZeroProjection => "zero_projection",
                E::ConditioningOnNull { .. } => "conditioning_on_null",
                E::NotDensity(_) => "not_density",
                E::PreconditionViolated(_) => "precondition_violated",
                E::Certificate { .. } => "certificate",
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
