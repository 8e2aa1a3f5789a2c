//! Experiment runner for the `exact-rwa` library: trajectories, functional
//! values, variational runs and verification reports driven by a TOML
//! configuration.

pub mod commands;
pub mod config;
pub mod record;

pub use commands::{cmd_functional, cmd_minimize, cmd_trajectory, cmd_verify, Outcome, Status};
pub use config::RunConfig;
pub use record::{with_uncertainty, ResultRecord};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] exact_rwa::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Every error that prevents a run is a configuration error (exit code 1).
    pub fn exit_code(&self) -> i32 {
        1
    }
}
