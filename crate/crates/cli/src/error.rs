use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Library(#[from] spinboson::Error),

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures, 1 for anything environmental.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Library(e) if e.is_validation() => 2,
            CliError::Library(spinboson::Error::Io(_) | spinboson::Error::Format(_)) => 1,
            CliError::Library(_) | CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}
