//! Command implementations behind the `semgraph` binary.

mod app;
mod commands;
pub mod config;

use thiserror::Error;

pub use app::{command, config_from_matches, run_matches};
pub use commands::{
    cmd_bench, cmd_delinearize, cmd_evaluate, cmd_linearize, cmd_oracle_check, cmd_parse, cmd_synth, cmd_train,
    OracleReport,
};
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    /// A check or round trip did not hold.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for failed checks, 2 for usage and I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<semgraph::Error> for CliError {
    fn from(e: semgraph::Error) -> Self {
        use semgraph::Error as E;
        match e {
            E::Config(m) => CliError::Usage(m),
            E::Diverged { .. } | E::Oracle(_) | E::IllegalAction { .. } => CliError::Failed(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
