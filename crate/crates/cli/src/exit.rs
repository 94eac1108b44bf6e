use std::fmt;
use std::process::ExitCode;

use gaussbomb_core::Error as CoreError;

/// Failure classes, each with its own process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed config, inconsistent setup. Exit 1.
    Usage(String),
    /// A numerical routine refused its input (branch cut, singular matrix, no convergence). Exit 2.
    Numerical(String),
    /// The run finished but a checked property failed. Exit 3.
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Invariant(_) => 3,
        })
    }

    /// Errors raised while turning a config into domain objects are the user's to fix.
    pub fn config(e: CoreError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical precondition failed: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
