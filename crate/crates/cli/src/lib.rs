//! Reproducible experiment commands that write CSV tables.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Report};
pub use config::{Command, ExperimentConfig};

/// Failure classes mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config file, unreadable input or invalid parameters (exit 2).
    #[error("input error: {0}")]
    Input(String),
    /// A numerical routine failed while running (exit 1).
    #[error("run failed: {0}")]
    Run(#[from] sbfcast_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}
