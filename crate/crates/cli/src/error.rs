use chute_core::ChuteError;
use thiserror::Error;

/// Exit code when an `oracle --check` finds a violated bound.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit code for malformed input, bad flags or parameters.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for failures during computation or output.
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::CheckFailed(_) => EXIT_CHECK_FAILED,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<ChuteError> for CliError {
    fn from(e: ChuteError) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Solver(e.to_string())
        }
    }
}
