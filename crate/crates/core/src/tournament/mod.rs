//! Episode execution, phase orchestration, seeding and score records.

pub mod crossplay;
pub mod episode;
pub mod phase;
pub mod seed;
pub mod summary;

use thiserror::Error;

use crate::domain::{DomainError, Phase};
use crate::populations::PolicyError;
use crate::substrates::SubstrateError;

pub use crossplay::{run_crossplay, CrossplayConfig};
pub use episode::{replay, run_episode, Contestant, EpisodeResult, PolicyFactory, ScriptedFactory, SeatOutcome};
pub use phase::{check_veil, duplicate_scenario_ids, run_phase, run_scenarios, Manifest, PhaseOutput, RosterEntry};
pub use seed::derive_seed;
pub use summary::{mean_se, summarize, Stat, Summary};

#[derive(Debug, Error)]
pub enum TournamentError {
    #[error("veil of ignorance violated: {0}")]
    Veil(String),
    #[error("duplicate scenario id '{0}'")]
    DuplicateScenario(String),
    #[error("no scenarios in the {0} phase")]
    NoScenarios(Phase),
    #[error("composition error: {0}")]
    Composition(String),
    #[error("cross-play needs at least 2 finalists, got {0}")]
    TooFewFinalists(usize),
    #[error("infeasible seating: {0}")]
    Infeasible(String),
    #[error("unknown agent '{0}'")]
    UnknownAgent(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}
