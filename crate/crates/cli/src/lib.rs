//! The `softheap` subcommands as plain functions: each returns its output
//! text and an [`Exit`] status, so tests drive them without a process.

pub mod bench;
pub mod replay;
pub mod sort;

use std::fmt;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Clean = 0,
    /// A contract or bound violation was found.
    Violation = 1,
    /// Bad arguments, unreadable or malformed input.
    Usage = 2,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Text written to standard output plus the status to exit with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub exit: Exit,
}

impl Output {
    pub fn clean(stdout: String) -> Self {
        Output {
            stdout,
            exit: Exit::Clean,
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.stdout)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: {message}")]
    Trace { line: usize, message: String },
}
