use gptlab_core::GptError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Core(GptError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 0 ok, 1 verification failure, 2 usage or bad input, 3 budget exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Budget(_) => 3,
            CliError::Core(e) => match e {
                GptError::NotAGroup(_)
                | GptError::NotTransitive
                | GptError::NotEquivariant(_)
                | GptError::NotObservable(_)
                | GptError::CorrectionNotContractive(_) => 1,
                _ => 2,
            },
            CliError::Usage(_) | CliError::Io { .. } => 2,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<GptError> for CliError {
    fn from(e: GptError) -> Self {
        match e {
            GptError::SearchBudgetExceeded(msg) => CliError::Budget(msg),
            other => CliError::Core(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
