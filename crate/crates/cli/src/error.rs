use thiserror::Error;

/// Failure classes of the command-line runner, each with its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<subrayleigh::Error> for CliError {
    fn from(e: subrayleigh::Error) -> Self {
        match e {
            subrayleigh::Error::NonConvergence(_) => CliError::NonConvergence(e.to_string()),
            subrayleigh::Error::Fit(_) => CliError::Numerical(e.to_string()),
            ref other if other.is_numerical() => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
