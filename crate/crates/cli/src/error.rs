use anonsched::attacker::AttackError;
use anonsched::metrics::MetricsError;
use anonsched::sim::SimError;
use anonsched::ParamError;
use thiserror::Error;

/// Process exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status when validation finds a mismatch or a run fails.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for bad arguments, bad configuration or invalid parameters.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid parameters at {point}: {source}")]
    InvalidPoint {
        point: String,
        #[source]
        source: ParamError,
    },
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("validation failed: {0} mismatching point(s)")]
    ValidationFailed(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::InvalidPoint { .. } | CliError::Config { .. } | CliError::Attack(_) => {
                EXIT_USAGE
            }
            CliError::Sim(SimError::Params(_) | SimError::LossOutOfRange(_)) => EXIT_USAGE,
            CliError::Sim(_)
            | CliError::Metrics(_)
            | CliError::ValidationFailed(_)
            | CliError::Io(_)
            | CliError::Csv(_) => EXIT_FAILURE,
        }
    }
}
