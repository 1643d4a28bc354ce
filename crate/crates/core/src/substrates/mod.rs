//! The five games as seeded state machines. Every game exposes the same
//! surface: an initial state drawn from a seed, the set of seats that must
//! act next, the grammar of legal attempts for each of them, and a Game
//! Master step that turns one joint action into a new state, events and
//! per-seat observations.

pub mod haggling;
pub mod labor;
pub mod matrix;
pub mod pub_coordination;
pub mod reality_show;
pub mod state_formation;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    ActionAttempt, ActionKind, DomainError, Event, EventKind, Mode, Observation, Payload,
    PhaseLabel, ScenarioSpec, SeededStream, Tag,
};

pub use haggling::{HagglingView, Trader};
pub use labor::{LaborChoice, LaborView};
pub use matrix::{matrix_payoff, GameKind, Move, PayoffTable};
pub use pub_coordination::{PubView, Venue};
pub use reality_show::RealityShowView;
pub use state_formation::{StateFormationView, Village};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstrateError {
    #[error("invalid substrate parameters: {0}")]
    Params(String),
    #[error("episode already finished")]
    Finished,
    #[error(transparent)]
    Rejected(#[from] Rejection),
    #[error("joint action has {got} entries for {seats} seats")]
    Arity { got: usize, seats: usize },
}

impl From<DomainError> for SubstrateError {
    fn from(e: DomainError) -> Self {
        SubstrateError::Params(e.to_string())
    }
}

/// A malformed or illegal attempt, tied to the seat that produced it.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("seat {seat}: {reason}")]
pub struct Rejection {
    pub seat: usize,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstrateId {
    RealityShow,
    PubCoordination,
    Haggling,
    LaborCollectiveAction,
    StateFormation,
}

impl SubstrateId {
    pub const ALL: [SubstrateId; 5] = [
        SubstrateId::RealityShow,
        SubstrateId::PubCoordination,
        SubstrateId::Haggling,
        SubstrateId::LaborCollectiveAction,
        SubstrateId::StateFormation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SubstrateId::RealityShow => "reality_show",
            SubstrateId::PubCoordination => "pub_coordination",
            SubstrateId::Haggling => "haggling",
            SubstrateId::LaborCollectiveAction => "labor_collective_action",
            SubstrateId::StateFormation => "state_formation",
        }
    }

    fn camel(self) -> &'static str {
        match self {
            SubstrateId::RealityShow => "RealityShow",
            SubstrateId::PubCoordination => "PubCoordination",
            SubstrateId::Haggling => "Haggling",
            SubstrateId::LaborCollectiveAction => "LaborCollectiveAction",
            SubstrateId::StateFormation => "StateFormation",
        }
    }

    pub fn default_tags(self) -> &'static [Tag] {
        use Tag::*;
        match self {
            SubstrateId::RealityShow => &[
                DiscouragingAntisocialBehavior,
                Persuasion,
                Calculation,
                ConventionFollowing,
            ],
            SubstrateId::PubCoordination => {
                &[Coordination, Persuasion, HiddenInformation, SocialNetworks]
            }
            SubstrateId::Haggling => &[Negotiation, Calculation],
            SubstrateId::LaborCollectiveAction => {
                &[DiscouragingAntisocialBehavior, Persuasion, Calculation]
            }
            SubstrateId::StateFormation => &[Negotiation, Persuasion],
        }
    }

    /// Two-party games seat players in independent pairs.
    pub fn is_pairwise(self) -> bool {
        matches!(self, SubstrateId::Haggling | SubstrateId::StateFormation)
    }

    pub fn default_population(self, mode: Mode) -> u32 {
        match (self, mode) {
            (SubstrateId::RealityShow, _) => 4,
            (SubstrateId::PubCoordination, _) => 6,
            (SubstrateId::LaborCollectiveAction, _) => 6,
            // one pair for a visitor; two pairs leave room for a focal majority
            (SubstrateId::Haggling | SubstrateId::StateFormation, Mode::Visitor) => 2,
            (SubstrateId::Haggling | SubstrateId::StateFormation, Mode::Resident) => 4,
        }
    }

    pub fn default_horizon(self) -> u32 {
        match self {
            SubstrateId::RealityShow => 10,
            SubstrateId::PubCoordination => 5,
            SubstrateId::Haggling => 6,
            SubstrateId::LaborCollectiveAction => 8,
            SubstrateId::StateFormation => 6,
        }
    }
}

impl fmt::Display for SubstrateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SubstrateId {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SubstrateId::ALL
            .into_iter()
            .find(|id| id.name() == s || id.camel() == s)
            .ok_or_else(|| DomainError::Unknown {
                what: "substrate",
                value: s.to_string(),
            })
    }
}

/// Per-scenario overrides of the substrate constants. Unset fields keep the
/// defaults; setting a field that belongs to another substrate is an error.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateParams {
    // reality show
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub games: Option<Vec<GameKind>>,
    // pub coordination
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pubs: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure_witnesses: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference_bonus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub friend_bonus: Option<f64>,
    // haggling
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub granularity: Option<f64>,
    // labor collective action
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raise_bonus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strike_threshold: Option<f64>,
    // state formation
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alliance_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defense_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raid_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persuade_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persuade_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approval_range: Option<[f64; 2]>,
}

impl SubstrateParams {
    fn owners(&self) -> Vec<(&'static str, bool, SubstrateId)> {
        use SubstrateId::*;
        vec![
            ("games", self.games.is_some(), RealityShow),
            ("pubs", self.pubs.is_some(), PubCoordination),
            ("closure_probability", self.closure_probability.is_some(), PubCoordination),
            ("closure_witnesses", self.closure_witnesses.is_some(), PubCoordination),
            ("preference_bonus", self.preference_bonus.is_some(), PubCoordination),
            ("friend_bonus", self.friend_bonus.is_some(), PubCoordination),
            ("cost_range", self.cost_range.is_some(), Haggling),
            ("value_range", self.value_range.is_some(), Haggling),
            ("granularity", self.granularity.is_some(), Haggling),
            ("wage", self.wage.is_some(), LaborCollectiveAction),
            ("raise_bonus", self.raise_bonus.is_some(), LaborCollectiveAction),
            ("strike_threshold", self.strike_threshold.is_some(), LaborCollectiveAction),
            ("alliance_value", self.alliance_value.is_some(), StateFormation),
            ("defense_cost", self.defense_cost.is_some(), StateFormation),
            ("raid_loss", self.raid_loss.is_some(), StateFormation),
            ("persuade_cost", self.persuade_cost.is_some(), StateFormation),
            ("persuade_step", self.persuade_step.is_some(), StateFormation),
            ("approval_range", self.approval_range.is_some(), StateFormation),
        ]
    }

    /// Reject parameters that belong to another substrate or whose values
    /// would make the game ill-defined.
    pub fn check(&self, substrate: SubstrateId) -> Result<(), SubstrateError> {
        let foreign: Vec<&str> = self
            .owners()
            .into_iter()
            .filter(|(_, set, owner)| *set && *owner != substrate)
            .map(|(name, _, _)| name)
            .collect();
        if !foreign.is_empty() {
            return Err(SubstrateError::Params(format!(
                "{} not applicable to {substrate}",
                foreign.join(", ")
            )));
        }
        match substrate {
            SubstrateId::RealityShow => reality_show::Config::from_params(self).map(drop),
            SubstrateId::PubCoordination => pub_coordination::Config::from_params(self).map(drop),
            SubstrateId::Haggling => haggling::Config::from_params(self).map(drop),
            SubstrateId::LaborCollectiveAction => labor::Config::from_params(self).map(drop),
            SubstrateId::StateFormation => state_formation::Config::from_params(self).map(drop),
        }
    }
}

pub(crate) fn param_err(msg: impl Into<String>) -> SubstrateError {
    SubstrateError::Params(msg.into())
}

/// The shape of legal output for one seat at one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum GrammarForm {
    /// Exactly one of the listed tokens.
    Tokens { options: Vec<String> },
    /// One token against everyone, or one token per listed opponent in order.
    PerOpponent {
        options: Vec<String>,
        opponents: Vec<usize>,
    },
    /// A venue declaration, optionally followed by `closed:<pub>` reports.
    PubMessage { venues: Vec<String>, pubs: Vec<String> },
    /// A number on the `step` grid within `[min, max]`, or one of the tokens.
    NumberOrToken {
        min: f64,
        max: f64,
        step: f64,
        tokens: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionGrammar {
    pub kind: ActionKind,
    #[serde(flatten)]
    pub form: GrammarForm,
    /// The passive action substituted for malformed or missing attempts.
    pub default: ActionAttempt,
}

pub(crate) const CLOSED_PREFIX: &str = "closed:";

fn on_grid(x: f64, min: f64, step: f64) -> bool {
    let k = (x - min) / step;
    (k - k.round()).abs() < 1e-6
}

impl ActionGrammar {
    pub(crate) fn tokens(kind: ActionKind, options: &[&str], default: &str) -> ActionGrammar {
        ActionGrammar {
            kind,
            form: GrammarForm::Tokens {
                options: options.iter().map(|s| s.to_string()).collect(),
            },
            default: ActionAttempt {
                kind,
                payload: Payload::Token(default.to_string()),
            },
        }
    }

    /// Check an attempt against this grammar.
    pub fn admits(&self, attempt: &ActionAttempt) -> Result<(), String> {
        if attempt.kind != self.kind {
            return Err(format!("expected a {:?} attempt, got {:?}", self.kind, attempt.kind));
        }
        let in_list = |t: &str, list: &[String]| list.iter().any(|o| o == t);
        match (&self.form, &attempt.payload) {
            (GrammarForm::Tokens { options }, Payload::Token(t)) if in_list(t, options) => Ok(()),
            (GrammarForm::PerOpponent { options, .. }, Payload::Token(t)) if in_list(t, options) => {
                Ok(())
            }
            (GrammarForm::PerOpponent { options, opponents }, Payload::Tokens(ts)) => {
                if ts.len() != opponents.len() {
                    Err(format!("expected {} moves, got {}", opponents.len(), ts.len()))
                } else if let Some(bad) = ts.iter().find(|t| !in_list(t, options)) {
                    Err(format!("'{bad}' is not one of {}", options.join("/")))
                } else {
                    Ok(())
                }
            }
            (GrammarForm::PubMessage { venues, .. }, Payload::Token(t)) if in_list(t, venues) => Ok(()),
            (GrammarForm::PubMessage { venues, pubs }, Payload::Tokens(ts)) => {
                let Some((first, reports)) = ts.split_first() else {
                    return Err("empty message".into());
                };
                if !in_list(first, venues) {
                    return Err(format!("'{first}' is not a venue"));
                }
                let mut seen = Vec::new();
                for r in reports {
                    match r.strip_prefix(CLOSED_PREFIX) {
                        Some(p) if in_list(p, pubs) && !seen.contains(&p) => seen.push(p),
                        _ => return Err(format!("'{r}' is not a closure report")),
                    }
                }
                Ok(())
            }
            (GrammarForm::NumberOrToken { tokens, .. }, Payload::Token(t)) if in_list(t, tokens) => {
                Ok(())
            }
            (GrammarForm::NumberOrToken { min, max, step, .. }, Payload::Number(x)) => {
                if !x.is_finite() {
                    Err("number is not finite".into())
                } else if *x < min - 1e-9 || *x > max + 1e-9 {
                    Err(format!("{x} outside [{min}, {max}]"))
                } else if !on_grid(*x, *min, *step) {
                    Err(format!("{x} is not a multiple of {step}"))
                } else {
                    Ok(())
                }
            }
            (_, payload) => Err(format!("payload {payload:?} does not fit {}", self.describe())),
        }
    }

    /// Plain-text description, used in prompts and diagnostics.
    pub fn describe(&self) -> String {
        let kind = match self.kind {
            ActionKind::Message => "message",
            ActionKind::Choice => "choice",
        };
        let body = match &self.form {
            GrammarForm::Tokens { options } => format!("one of: {}", options.join(", ")),
            GrammarForm::PerOpponent { options, opponents } => {
                let seats: Vec<String> = opponents.iter().map(|s| format!("seat {s}")).collect();
                format!(
                    "one of {} for everyone, or one per opponent in the order {}",
                    options.join("/"),
                    seats.join(", ")
                )
            }
            GrammarForm::PubMessage { venues, pubs } => format!(
                "a venue ({}), optionally followed by closure reports such as {}{}",
                venues.join(", "),
                CLOSED_PREFIX,
                pubs.first().map(String::as_str).unwrap_or("pub0")
            ),
            GrammarForm::NumberOrToken {
                min,
                max,
                step,
                tokens,
            } => {
                if tokens.is_empty() {
                    format!("a number from {min} to {max} in steps of {step}")
                } else {
                    format!(
                        "a number from {min} to {max} in steps of {step}, or one of: {}",
                        tokens.join(", ")
                    )
                }
            }
        };
        format!("{kind}: {body}")
    }
}

/// What only the owning seat can see.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "substrate", rename_all = "snake_case")]
pub enum PrivateState {
    RealityShow(RealityShowView),
    PubCoordination(PubView),
    Haggling(HagglingView),
    LaborCollectiveAction(LaborView),
    StateFormation(StateFormationView),
}

/// Bookkeeping shared by all games.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub substrate: SubstrateId,
    pub seats: usize,
    pub round: u32,
    pub horizon: u32,
    pub phase: PhaseLabel,
    pub step_index: u32,
    pub scores: Vec<f64>,
    pub finished: bool,
}

impl Progress {
    fn new(substrate: SubstrateId, seats: usize, horizon: u32, phase: PhaseLabel) -> Progress {
        Progress {
            substrate,
            seats,
            round: 0,
            horizon,
            phase,
            step_index: 0,
            scores: vec![0.0; seats],
            finished: horizon == 0,
        }
    }

    pub(crate) fn end_round(&mut self, first_phase: PhaseLabel) {
        self.round += 1;
        self.phase = first_phase;
        if self.round >= self.horizon {
            self.finished = true;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "snake_case")]
pub enum GameState {
    RealityShow(reality_show::RealityShow),
    PubCoordination(pub_coordination::PubGame),
    Haggling(haggling::Haggling),
    LaborCollectiveAction(labor::Labor),
    StateFormation(state_formation::StateFormation),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstrateState {
    pub progress: Progress,
    pub game: GameState,
}

impl SubstrateState {
    pub fn substrate(&self) -> SubstrateId {
        self.progress.substrate
    }

    pub fn is_finished(&self) -> bool {
        self.progress.finished
    }

    pub fn scores(&self) -> &[f64] {
        &self.progress.scores
    }

    pub fn seats(&self) -> usize {
        self.progress.seats
    }

    fn rules(&self) -> &dyn Rules {
        match &self.game {
            GameState::RealityShow(g) => g,
            GameState::PubCoordination(g) => g,
            GameState::Haggling(g) => g,
            GameState::LaborCollectiveAction(g) => g,
            GameState::StateFormation(g) => g,
        }
    }

    fn rules_mut(&mut self) -> (&mut Progress, &mut dyn Rules) {
        let game: &mut dyn Rules = match &mut self.game {
            GameState::RealityShow(g) => g,
            GameState::PubCoordination(g) => g,
            GameState::Haggling(g) => g,
            GameState::LaborCollectiveAction(g) => g,
            GameState::StateFormation(g) => g,
        };
        (&mut self.progress, game)
    }
}

/// Game-specific rules behind the common step function.
pub(crate) trait Rules {
    /// Seats that must submit an attempt at the current step, ascending.
    fn awaiting(&self, p: &Progress) -> Vec<usize>;
    /// Legal output for an awaiting seat.
    fn grammar(&self, p: &Progress, seat: usize) -> ActionGrammar;
    /// Label a legal attempt as cooperative or not.
    fn cooperative(&self, p: &Progress, seat: usize, attempt: &ActionAttempt) -> bool;
    /// Apply a legal joint action, emitting outcome events.
    fn advance(
        &mut self,
        p: &mut Progress,
        acts: &[(usize, ActionAttempt)],
        rng: &mut SeededStream,
        events: &mut Vec<Event>,
    );
    fn view(&self, p: &Progress, seat: usize) -> PrivateState;
    /// Who sees a seat's own attempts; `None` is everyone.
    fn audience(&self, _seat: usize) -> Option<Vec<usize>> {
        None
    }
}

pub(crate) fn event(speaker: Option<usize>, kind: EventKind, audience: Option<Vec<usize>>) -> Event {
    Event {
        step: 0,
        round: 0,
        speaker,
        kind,
        audience,
    }
}

pub(crate) fn payoff_event(seat: usize, delta: f64) -> Event {
    event(Some(seat), EventKind::Payoff { delta }, Some(vec![seat]))
}

/// Deterministic initial state for a scenario. Hidden variables come from
/// a stream seeded with `seed`.
pub fn initial_state(spec: &ScenarioSpec, seed: u64) -> Result<SubstrateState, SubstrateError> {
    let substrate = spec.substrate()?;
    spec.params.check(substrate)?;
    let n = spec.population_size() as usize;
    if n < 2 {
        return Err(param_err(format!("population size {n} is below 2")));
    }
    if substrate.is_pairwise() && n % 2 != 0 {
        return Err(param_err(format!("{substrate} needs an even number of seats")));
    }
    let horizon = spec.horizon();
    let mut rng = crate::domain::stream(seed);
    let (phase, game) = match substrate {
        SubstrateId::RealityShow => (
            PhaseLabel::Communication,
            GameState::RealityShow(reality_show::RealityShow::new(
                reality_show::Config::from_params(&spec.params)?,
                n,
            )),
        ),
        SubstrateId::PubCoordination => (
            PhaseLabel::Communication,
            GameState::PubCoordination(pub_coordination::PubGame::new(
                pub_coordination::Config::from_params(&spec.params)?,
                n,
                horizon,
                &mut rng,
            )),
        ),
        SubstrateId::Haggling => (
            PhaseLabel::Action,
            GameState::Haggling(haggling::Haggling::new(
                haggling::Config::from_params(&spec.params)?,
                n,
                &mut rng,
            )),
        ),
        SubstrateId::LaborCollectiveAction => (
            PhaseLabel::Communication,
            GameState::LaborCollectiveAction(labor::Labor::new(
                labor::Config::from_params(&spec.params)?,
                n,
            )),
        ),
        SubstrateId::StateFormation => (
            PhaseLabel::Communication,
            GameState::StateFormation(state_formation::StateFormation::new(
                state_formation::Config::from_params(&spec.params)?,
                n,
                &mut rng,
            )),
        ),
    };
    Ok(SubstrateState {
        progress: Progress::new(substrate, n, horizon, phase),
        game,
    })
}

/// Seats that must act at the current step; empty once the episode ends.
pub fn awaiting(state: &SubstrateState) -> Vec<usize> {
    if state.is_finished() {
        return Vec::new();
    }
    state.rules().awaiting(&state.progress)
}

/// Legal output for `seat`, or `None` if the seat is not asked to act now.
pub fn grammar(state: &SubstrateState, seat: usize) -> Option<ActionGrammar> {
    awaiting(state)
        .contains(&seat)
        .then(|| state.rules().grammar(&state.progress, seat))
}

pub fn validate_action(
    state: &SubstrateState,
    seat: usize,
    attempt: &ActionAttempt,
) -> Result<(), Rejection> {
    let g = grammar(state, seat).ok_or_else(|| Rejection {
        seat,
        reason: "seat is not expected to act now".into(),
    })?;
    g.admits(attempt).map_err(|reason| Rejection { seat, reason })
}

/// The passive action for an awaiting seat.
pub fn default_action(state: &SubstrateState, seat: usize) -> Option<ActionAttempt> {
    grammar(state, seat).map(|g| g.default)
}

/// Cooperation label of a legal attempt in the current state.
pub fn is_cooperative(state: &SubstrateState, seat: usize, attempt: &ActionAttempt) -> bool {
    state.rules().cooperative(&state.progress, seat, attempt)
}

/// What `seat` sees right now, without any new events.
pub fn observe(state: &SubstrateState, seat: usize) -> Observation {
    observation(state, seat, &[])
}

fn observation(state: &SubstrateState, seat: usize, events: &[Event]) -> Observation {
    let p = &state.progress;
    Observation {
        seat,
        substrate: p.substrate,
        round: p.round,
        horizon: p.horizon,
        phase_label: if p.finished { PhaseLabel::Outcome } else { p.phase },
        public_events: events.iter().filter(|e| e.visible_to(seat)).cloned().collect(),
        private_state: state.rules().view(p, seat),
        grammar: grammar(state, seat),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: SubstrateState,
    /// One observation per seat, in seat order.
    pub observations: Vec<Observation>,
    pub events: Vec<Event>,
}

/// The Game Master transition. `joint` holds one entry per seat; entries for
/// seats that are not awaited are ignored. Every awaited seat must carry a
/// legal attempt, otherwise the step is refused with the offending seat.
pub fn step(
    state: &SubstrateState,
    joint: &[Option<ActionAttempt>],
    rng: &mut SeededStream,
) -> Result<StepOutcome, SubstrateError> {
    if state.is_finished() {
        return Err(SubstrateError::Finished);
    }
    if joint.len() != state.seats() {
        return Err(SubstrateError::Arity {
            got: joint.len(),
            seats: state.seats(),
        });
    }
    let mut acts = Vec::new();
    for seat in awaiting(state) {
        let attempt = joint[seat].clone().ok_or_else(|| Rejection {
            seat,
            reason: "no attempt submitted".into(),
        })?;
        validate_action(state, seat, &attempt)?;
        acts.push((seat, attempt));
    }

    let mut events: Vec<Event> = acts
        .iter()
        .map(|(seat, attempt)| {
            event(
                Some(*seat),
                EventKind::Act {
                    attempt: attempt.clone(),
                    cooperative: is_cooperative(state, *seat, attempt),
                },
                state.rules().audience(*seat),
            )
        })
        .collect();

    let mut next = state.clone();
    let (step_index, round) = (next.progress.step_index, next.progress.round);
    {
        let (progress, rules) = next.rules_mut();
        rules.advance(progress, &acts, rng, &mut events);
        progress.step_index += 1;
    }
    for e in &mut events {
        e.step = step_index;
        e.round = round;
    }
    let observations = (0..next.seats())
        .map(|seat| observation(&next, seat, &events))
        .collect();
    Ok(StepOutcome {
        state: next,
        observations,
        events,
    })
}

/// Analytic per-seat score bounds for a scenario under its resolved
/// parameters.
pub fn theoretical_bounds(spec: &ScenarioSpec) -> Result<(f64, f64), SubstrateError> {
    let substrate = spec.substrate()?;
    let n = spec.population_size() as usize;
    let h = spec.horizon();
    let p = &spec.params;
    Ok(match substrate {
        SubstrateId::RealityShow => reality_show::Config::from_params(p)?.bounds(n, h),
        SubstrateId::PubCoordination => pub_coordination::Config::from_params(p)?.bounds(n, h),
        SubstrateId::Haggling => haggling::Config::from_params(p)?.bounds(h),
        SubstrateId::LaborCollectiveAction => labor::Config::from_params(p)?.bounds(n, h),
        SubstrateId::StateFormation => state_formation::Config::from_params(p)?.bounds(h),
    })
}
