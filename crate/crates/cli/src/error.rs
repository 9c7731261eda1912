use std::fmt;

use itd_core::Error;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
    Io(std::io::Error),
    /// Names of the failed self-test suites.
    Selftest(Vec<String>),
    /// Conservation identity broken on a completed sweep.
    NotConserved,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Core(e) => match e {
                Error::DegenerateMedium | Error::NearCritical(_) => 2,
                Error::InvalidMedium(_) | Error::ReferenceTooHigh { .. } => 3,
                Error::UnresolvedEvent { .. } => 4,
                _ => 1,
            },
            CliError::Io(_) | CliError::Selftest(_) | CliError::NotConserved => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Selftest(names) => write!(f, "selftest failed: {}", names.join(", ")),
            CliError::NotConserved => write!(
                f,
                "flow ledger violates n_minus_end - n_minus_start == n1 + n2"
            ),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}
