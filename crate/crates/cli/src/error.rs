use thiserror::Error;

/// Exit codes: 0 success, 1 usage or configuration error, 2 data error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Lib(#[from] topicdisc::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) if e.is_config() => 1,
            CliError::Lib(_) => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
