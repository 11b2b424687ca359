use thiserror::Error;

/// Failures of a CLI run, each mapped to an exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{failed} check(s) failed")]
    Checks { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Checks { .. } | CliError::Numerical(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<mhjump::Error> for CliError {
    fn from(e: mhjump::Error) -> Self {
        use mhjump::Error as E;
        match e {
            E::Config(_) | E::Usage(_) | E::Parse(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
