use std::fmt;

/// Harness-level failure categories, mapped one-to-one onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad manifest, bad parameters, refused sweeps. Exit code 2.
    Config(String),
    /// Solver numeric failure. Exit code 3.
    Numeric(String),
    /// Unreadable input or unwritable output. Exit code 4.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<deframe_core::Error> for CliError {
    fn from(err: deframe_core::Error) -> Self {
        match err {
            deframe_core::Error::NonFinite(msg) | deframe_core::Error::NumericConsistency(msg) => {
                CliError::Numeric(msg)
            }
            deframe_core::Error::InvalidDimension(msg) | deframe_core::Error::Domain(msg) => {
                CliError::Config(msg)
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
