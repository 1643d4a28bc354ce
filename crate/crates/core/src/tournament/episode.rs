//! One episode: build the seat policies, loop the Game Master until the
//! horizon, and contain whatever a policy does wrong.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::seed::{derive_seed, ENVIRONMENT_SEAT, STEP_SEAT};
use super::TournamentError;
use crate::domain::{stream, AgentId, Event, EventKind, Role, ScenarioSpec, SeatAssignment};
use crate::populations::{make_background_policy, BackgroundStrategyId, Policy, PolicyError};
use crate::substrates::{self, SubstrateId, SubstrateState};

/// Builds fresh policy instances; one instance per seat per episode.
pub trait PolicyFactory: Send + Sync {
    fn build(&self, substrate: SubstrateId, seed: u64) -> Result<Box<dyn Policy>, PolicyError>;
}

/// Factory for the scripted strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScriptedFactory(pub BackgroundStrategyId);

impl PolicyFactory for ScriptedFactory {
    fn build(&self, substrate: SubstrateId, seed: u64) -> Result<Box<dyn Policy>, PolicyError> {
        Ok(Box::new(make_background_policy(self.0, substrate, seed)?))
    }
}

/// An agent identity bound to the factory that plays for it.
#[derive(Clone)]
pub struct Contestant {
    pub agent: AgentId,
    pub factory: Arc<dyn PolicyFactory>,
}

impl Contestant {
    pub fn new(agent: AgentId, factory: Arc<dyn PolicyFactory>) -> Contestant {
        Contestant { agent, factory }
    }

    pub fn scripted(agent: AgentId, strategy: BackgroundStrategyId) -> Contestant {
        Contestant::new(agent, Arc::new(ScriptedFactory(strategy)))
    }
}

impl fmt::Debug for Contestant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Contestant").field("agent", &self.agent).finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeatOutcome {
    pub seat: usize,
    pub agent: AgentId,
    pub role: Role,
    pub raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scenario_id: String,
    pub run_index: u32,
    /// Environment seed the episode was drawn from.
    pub seed: u64,
    pub seats: Vec<SeatOutcome>,
    pub trajectory: Vec<Event>,
}

impl EpisodeResult {
    /// Mean raw score over the seats held by `agent`.
    pub fn mean_raw(&self, agent: &AgentId) -> Option<f64> {
        mean(self.seats.iter().filter(|s| &s.agent == agent).map(|s| s.raw))
    }

    /// Mean raw score over seats with the given role.
    pub fn role_raw(&self, role: Role) -> Option<f64> {
        mean(self.seats.iter().filter(|s| s.role == role).map(|s| s.raw))
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

struct Runner {
    policy: Option<Box<dyn Policy>>,
    rng: crate::domain::SeededStream,
}

fn stamp(mut e: Event, state: &SubstrateState) -> Event {
    e.step = state.progress.step_index;
    e.round = state.progress.round;
    e
}

fn fault(seat: usize, reason: String) -> Event {
    Event {
        step: 0,
        round: 0,
        speaker: Some(seat),
        kind: EventKind::PolicyFault { reason },
        audience: None,
    }
}

fn panic_reason(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".to_string())
}

/// Play one episode. A policy that errors or panics is retired and its seat
/// plays the substrate's default action for the rest of the episode; a
/// malformed attempt is replaced by the default for that step only. Both
/// are recorded in the trajectory.
pub fn run_episode(
    spec: &ScenarioSpec,
    seats: &SeatAssignment<Contestant>,
    run_index: u32,
    master_seed: u64,
) -> Result<EpisodeResult, TournamentError> {
    let substrate = spec.substrate()?;
    let env_seed = derive_seed(master_seed, &spec.scenario_id, run_index, ENVIRONMENT_SEAT);
    let mut state = substrates::initial_state(spec, env_seed)?;
    if state.seats() != seats.len() {
        return Err(TournamentError::Composition(format!(
            "{} seats assigned to a {}-seat scenario",
            seats.len(),
            state.seats()
        )));
    }
    let mut env_rng = stream(derive_seed(master_seed, &spec.scenario_id, run_index, STEP_SEAT));
    let mut trajectory = Vec::new();

    let mut runners: Vec<Runner> = seats
        .seats
        .iter()
        .map(|seat| {
            let seed = derive_seed(master_seed, &spec.scenario_id, run_index, seat.index as u32);
            let built = catch_unwind(AssertUnwindSafe(|| seat.policy.factory.build(substrate, seed)));
            let policy = match built {
                Ok(Ok(p)) => Some(p),
                Ok(Err(e)) => {
                    trajectory.push(stamp(fault(seat.index, e.to_string()), &state));
                    None
                }
                Err(p) => {
                    trajectory.push(stamp(fault(seat.index, panic_reason(p)), &state));
                    None
                }
            };
            Runner {
                policy,
                rng: stream(seed),
            }
        })
        .collect();

    let mut observations: Vec<_> = (0..state.seats()).map(|s| substrates::observe(&state, s)).collect();
    while !state.is_finished() {
        let awaiting = substrates::awaiting(&state);
        let mut joint = vec![None; state.seats()];
        for (seat, runner) in runners.iter_mut().enumerate() {
            let obs = &observations[seat];
            let Some(policy) = runner.policy.as_mut() else {
                if awaiting.contains(&seat) {
                    joint[seat] = substrates::default_action(&state, seat);
                }
                continue;
            };
            if !awaiting.contains(&seat) {
                if let Err(p) = catch_unwind(AssertUnwindSafe(|| policy.observe(obs))) {
                    trajectory.push(stamp(fault(seat, panic_reason(p)), &state));
                    runner.policy = None;
                }
                continue;
            }
            let rng = &mut runner.rng;
            let outcome = catch_unwind(AssertUnwindSafe(|| policy.act(obs, rng)));
            let notes = policy.drain_notes();
            trajectory.extend(notes.into_iter().map(|kind| {
                stamp(
                    Event {
                        step: 0,
                        round: 0,
                        speaker: Some(seat),
                        kind,
                        audience: None,
                    },
                    &state,
                )
            }));
            let default = substrates::default_action(&state, seat);
            joint[seat] = match outcome {
                Ok(Ok(attempt)) => match substrates::validate_action(&state, seat, &attempt) {
                    Ok(()) => Some(attempt),
                    Err(rejection) => {
                        if let Some(substitute) = default.clone() {
                            trajectory.push(stamp(
                                Event {
                                    step: 0,
                                    round: 0,
                                    speaker: Some(seat),
                                    kind: EventKind::Rejected {
                                        reason: rejection.reason,
                                        substitute,
                                    },
                                    audience: None,
                                },
                                &state,
                            ));
                        }
                        default
                    }
                },
                Ok(Err(e)) => {
                    trajectory.push(stamp(fault(seat, e.to_string()), &state));
                    runner.policy = None;
                    default
                }
                Err(p) => {
                    trajectory.push(stamp(fault(seat, panic_reason(p)), &state));
                    runner.policy = None;
                    default
                }
            };
        }
        let out = substrates::step(&state, &joint, &mut env_rng)?;
        trajectory.extend(out.events);
        observations = out.observations;
        state = out.state;
    }
    // let every policy see the final outcome
    for (seat, runner) in runners.iter_mut().enumerate() {
        if let Some(policy) = runner.policy.as_mut() {
            let _ = catch_unwind(AssertUnwindSafe(|| policy.observe(&observations[seat])));
        }
    }

    Ok(EpisodeResult {
        scenario_id: spec.scenario_id.clone(),
        run_index,
        seed: env_seed,
        seats: seats
            .seats
            .iter()
            .map(|s| SeatOutcome {
                seat: s.index,
                agent: s.policy.agent.clone(),
                role: s.role,
                raw: state.scores()[s.index],
            })
            .collect(),
        trajectory,
    })
}

/// Re-apply the attempts logged in a trajectory and return the final
/// per-seat scores.
pub fn replay(
    spec: &ScenarioSpec,
    run_index: u32,
    master_seed: u64,
    trajectory: &[Event],
) -> Result<Vec<f64>, TournamentError> {
    let env_seed = derive_seed(master_seed, &spec.scenario_id, run_index, ENVIRONMENT_SEAT);
    let mut state = substrates::initial_state(spec, env_seed)?;
    let mut env_rng = stream(derive_seed(master_seed, &spec.scenario_id, run_index, STEP_SEAT));
    while !state.is_finished() {
        let step = state.progress.step_index;
        let mut joint = vec![None; state.seats()];
        for e in trajectory.iter().filter(|e| e.step == step) {
            if let (EventKind::Act { attempt, .. }, Some(seat)) = (&e.kind, e.speaker) {
                joint[seat] = Some(attempt.clone());
            }
        }
        state = substrates::step(&state, &joint, &mut env_rng)?.state;
    }
    Ok(state.scores().to_vec())
}
