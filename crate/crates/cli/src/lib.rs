//! Command-line front end for dopkit: configuration, run orchestration,
//! structured output and the acceptance suite.

pub mod accept;
pub mod commands;
pub mod config;
pub mod output;
pub mod pipeline;

use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Acceptance(m) => write!(f, "acceptance failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dopkit::Error> for CliError {
    fn from(e: dopkit::Error) -> Self {
        match e {
            dopkit::Error::Config(_) | dopkit::Error::Precondition(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}
