//! Command-line front end: configuration, figure tables, sweeps and the
//! verification report.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{evaluate, run, Outcome};
pub use config::RunConfig;
pub use output::{Artifact, Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid value for `{key}`: {msg}")]
    InvalidValue { key: String, msg: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("line {line} is not `key=value`: `{text}`")]
    Malformed { line: usize, text: String },
    #[error("{0}")]
    Compute(String),
    #[error("verification suite failed")]
    Verification,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status: 2 for a failed verification suite, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification => 2,
            _ => 1,
        }
    }
}
