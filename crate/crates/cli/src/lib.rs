//! Experiment harness around `matmart`: JSON config in, CSV or JSON tables
//! out, exit status 0 (pass), 1 (a verdict failed) or 2 (usage error).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod table;

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad config, arguments, paths or parameters.
    Usage(String),
    Io(String),
    /// Verification ran and some rows failed.
    Failed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "error: {m}"),
            CliError::Failed(n) => write!(f, "FAIL: {n} row(s) violate their bound"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<matmart::Error> for CliError {
    fn from(e: matmart::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
