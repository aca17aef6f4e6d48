//! Batch front-end for nustab experiments: JSON configs in, CSV tables and
//! JSON reports out.

use std::fmt;

pub mod config;
pub mod output;
pub mod recipes;
pub mod report;
pub mod run;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    /// A reproduction ran but landed outside its expected range.
    pub const CHECK_FAILED: i32 = 4;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn from_core(op: &str, e: nustab_core::Error) -> Self {
        let msg = format!("{op}: {e}");
        if e.is_numerical() {
            CliError::Numerical(msg)
        } else {
            CliError::Validation(msg)
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Io(_) => exit::IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
