//! The policy interface every seat implements, and the scripted background
//! strategies that populate scenarios.

mod scripted;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ActionAttempt, DomainError, EventKind, Observation, SeededStream};
use crate::substrates::SubstrateId;

pub use scripted::Scripted;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("strategy {strategy} is not defined for {substrate}")]
    Unsupported {
        strategy: BackgroundStrategyId,
        substrate: SubstrateId,
    },
    #[error("policy built for {expected} received a {got} observation")]
    WrongSubstrate {
        expected: SubstrateId,
        got: SubstrateId,
    },
    #[error("policy failed: {0}")]
    Failed(String),
}

/// A seat's decision rule. `act` is called whenever the seat must submit an
/// attempt; `observe` receives every other observation so that policies can
/// keep their own history.
pub trait Policy: Send {
    fn reset(&mut self, seed: u64);

    fn act(&mut self, obs: &Observation, rng: &mut SeededStream) -> Result<ActionAttempt, PolicyError>;

    fn observe(&mut self, _obs: &Observation) {}

    /// Usage notes accumulated since the last drain, logged by the runner.
    fn drain_notes(&mut self) -> Vec<EventKind> {
        Vec::new()
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn reset(&mut self, seed: u64) {
        (**self).reset(seed)
    }

    fn act(&mut self, obs: &Observation, rng: &mut SeededStream) -> Result<ActionAttempt, PolicyError> {
        (**self).act(obs, rng)
    }

    fn observe(&mut self, obs: &Observation) {
        (**self).observe(obs)
    }

    fn drain_notes(&mut self) -> Vec<EventKind> {
        (**self).drain_notes()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundStrategyId {
    NaiveAltruist,
    Defector,
    ConditionalCooperator,
    GrimTrigger,
    Stubborn,
    FairSplitter,
    Random,
    RationalBaseline,
}

impl BackgroundStrategyId {
    pub const ALL: [BackgroundStrategyId; 8] = [
        BackgroundStrategyId::NaiveAltruist,
        BackgroundStrategyId::Defector,
        BackgroundStrategyId::ConditionalCooperator,
        BackgroundStrategyId::GrimTrigger,
        BackgroundStrategyId::Stubborn,
        BackgroundStrategyId::FairSplitter,
        BackgroundStrategyId::Random,
        BackgroundStrategyId::RationalBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackgroundStrategyId::NaiveAltruist => "naive_altruist",
            BackgroundStrategyId::Defector => "defector",
            BackgroundStrategyId::ConditionalCooperator => "conditional_cooperator",
            BackgroundStrategyId::GrimTrigger => "grim_trigger",
            BackgroundStrategyId::Stubborn => "stubborn",
            BackgroundStrategyId::FairSplitter => "fair_splitter",
            BackgroundStrategyId::Random => "random",
            BackgroundStrategyId::RationalBaseline => "rational_baseline",
        }
    }

    fn camel(self) -> &'static str {
        match self {
            BackgroundStrategyId::NaiveAltruist => "NaiveAltruist",
            BackgroundStrategyId::Defector => "Defector",
            BackgroundStrategyId::ConditionalCooperator => "ConditionalCooperator",
            BackgroundStrategyId::GrimTrigger => "GrimTrigger",
            BackgroundStrategyId::Stubborn => "Stubborn",
            BackgroundStrategyId::FairSplitter => "FairSplitter",
            BackgroundStrategyId::Random => "Random",
            BackgroundStrategyId::RationalBaseline => "RationalBaseline",
        }
    }

    /// Stubbornness only has meaning where there is something to concede.
    pub fn supports(self, substrate: SubstrateId) -> bool {
        match self {
            BackgroundStrategyId::Stubborn => {
                matches!(substrate, SubstrateId::Haggling | SubstrateId::StateFormation)
            }
            _ => true,
        }
    }
}

impl fmt::Display for BackgroundStrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackgroundStrategyId {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BackgroundStrategyId::ALL
            .into_iter()
            .find(|id| id.name() == s || id.camel() == s)
            .ok_or_else(|| DomainError::Unknown {
                what: "background strategy",
                value: s.to_string(),
            })
    }
}

/// Build a scripted strategy for one substrate.
pub fn make_background_policy(
    id: BackgroundStrategyId,
    substrate: SubstrateId,
    seed: u64,
) -> Result<Scripted, PolicyError> {
    if !id.supports(substrate) {
        return Err(PolicyError::Unsupported {
            strategy: id,
            substrate,
        });
    }
    let mut policy = Scripted::new(id, substrate);
    policy.reset(seed);
    Ok(policy)
}

/// The myopic best-response reference agent.
pub fn rational_baseline_policy(substrate: SubstrateId, seed: u64) -> Scripted {
    let mut policy = Scripted::new(BackgroundStrategyId::RationalBaseline, substrate);
    policy.reset(seed);
    policy
}
