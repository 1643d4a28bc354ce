//! Manifest loading, record files and the subcommands behind the `arena`
//! binary.

pub mod commands;
pub mod manifest;
pub mod records;

use std::path::Path;

use arena_core::tournament::TournamentError;
use thiserror::Error;

pub use commands::{cmd_rank, cmd_report, cmd_run, cmd_validate, PhaseArg, RankArgs, ReportArgs, RunArgs};
pub use manifest::{AgentKind, AgentSpec, CrossplaySection, EndpointOverrides, LlmSection, ManifestFile};
pub use records::{read_records, write_jsonl, write_records};

/// A failure with the exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, unreadable or unwritable files.
    #[error("{0}")]
    Usage(String),
    /// The manifest or the inputs do not satisfy the tournament rules.
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Veil(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Veil(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
        CliError::Usage(format!("{}: {e}", path.display()))
    }
}

impl From<TournamentError> for CliError {
    fn from(e: TournamentError) -> Self {
        match e {
            TournamentError::Veil(_) => CliError::Veil(e.to_string()),
            TournamentError::ThreadPool(_) => CliError::Usage(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}
