use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad configuration values or an unreadable config file.
    #[error("{0}")]
    Usage(String),
    /// Inputs that cannot be read, parsed or processed.
    #[error("{0}")]
    Data(String),
    /// A result that violates a property the library guarantees.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    /// A data error naming the file that could not be read or written.
    pub fn file(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |e| CliError::Data(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<dowker_core::Error> for CliError {
    fn from(e: dowker_core::Error) -> Self {
        match e {
            dowker_core::Error::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<dowker_nn::NnError> for CliError {
    fn from(e: dowker_nn::NnError) -> Self {
        match e {
            dowker_nn::NnError::Config(m) => CliError::Usage(m),
            dowker_nn::NnError::Core(c) => c.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
