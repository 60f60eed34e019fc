//! Configuration-driven DMRG runs and result archives.

pub mod archive;
pub mod config;
pub mod run;

use thiserror::Error;

pub use archive::{Archive, ArchiveError, Record};
pub use config::RunConfig;
pub use run::{expect_report, inspect_report, run, RunOutput};

/// Environment variable that overrides the configured seed.
pub const SEED_VAR: &str = "TNKIT_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<tnkit_mps::MpsError> for CliError {
    fn from(e: tnkit_mps::MpsError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<ArchiveError> for CliError {
    fn from(e: ArchiveError) -> Self {
        match e {
            ArchiveError::Missing(_) | ArchiveError::WrongKind { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}
