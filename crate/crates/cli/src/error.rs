//! CLI error type mapping onto the documented exit codes:
//! 0 ok, 1 check failure, 2 I/O or format error.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Filesystem problems (exit 2).
    Io(std::io::Error),
    /// Malformed input files or config (exit 2).
    Format(String),
    /// Check-suite or invariant failure (exit 1).
    Check(String),
    /// A pipeline stage failed; carries the stage name and frame id (exit 2).
    Stage {
        stage: &'static str,
        frame: u64,
        detail: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            _ => 2,
        }
    }

    pub fn format(msg: impl Into<String>) -> Self {
        CliError::Format(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "io: {e}"),
            CliError::Format(m) => write!(f, "format: {m}"),
            CliError::Check(m) => write!(f, "check: {m}"),
            CliError::Stage {
                stage,
                frame,
                detail,
            } => write!(f, "stage '{stage}' failed on frame {frame}: {detail}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
