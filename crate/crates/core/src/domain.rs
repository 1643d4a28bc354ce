//! Domain types shared by every part of the harness: agent identities,
//! scenario descriptions, action attempts, observations and score records,
//! plus the three pure operations that sit directly on them (score
//! normalization, population composition, scenario validation).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::populations::BackgroundStrategyId;
use crate::substrates::{self, ActionGrammar, PrivateState, SubstrateId, SubstrateParams};

/// Seeded random stream handed to substrates and policies.
pub type SeededStream = ChaCha8Rng;

/// Build a seeded stream from a 64-bit seed.
pub fn stream(seed: u64) -> SeededStream {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("agent id must be non-empty")]
    EmptyAgentId,
    #[error("invalid bounds: theoretical min {min} must be below max {max}")]
    InvalidBounds { min: f64, max: f64 },
    #[error("raw score is NaN")]
    NanScore,
    #[error("composition error: {0}")]
    Composition(String),
    #[error("unknown {what} '{value}'")]
    Unknown { what: &'static str, value: String },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Result<Self, DomainError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(DomainError::EmptyAgentId);
        }
        Ok(AgentId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for AgentId {
    type Error = DomainError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        AgentId::new(value)
    }
}

impl From<AgentId> for String {
    fn from(id: AgentId) -> String {
        id.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Focal majority, background minority.
    Resident,
    /// One focal seat among background co-players.
    Visitor,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Resident => "resident",
            Mode::Visitor => "visitor",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    #[serde(alias = "dev")]
    Development,
    #[serde(alias = "eval")]
    Evaluation,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Development => "development",
            Phase::Evaluation => "evaluation",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Focal,
    Background,
}

/// Capability tags attached to scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Negotiation,
    Persuasion,
    DiscouragingAntisocialBehavior,
    Calculation,
    Coordination,
    HiddenInformation,
    SocialNetworks,
    ConventionFollowing,
}

impl Tag {
    pub const ALL: [Tag; 8] = [
        Tag::Negotiation,
        Tag::Persuasion,
        Tag::DiscouragingAntisocialBehavior,
        Tag::Calculation,
        Tag::Coordination,
        Tag::HiddenInformation,
        Tag::SocialNetworks,
        Tag::ConventionFollowing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tag::Negotiation => "negotiation",
            Tag::Persuasion => "persuasion",
            Tag::DiscouragingAntisocialBehavior => "discouraging_antisocial_behavior",
            Tag::Calculation => "calculation",
            Tag::Coordination => "coordination",
            Tag::HiddenInformation => "hidden_information",
            Tag::SocialNetworks => "social_networks",
            Tag::ConventionFollowing => "convention_following",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tag {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| DomainError::Unknown {
                what: "tag",
                value: s.to_string(),
            })
    }
}

/// One scenario: a substrate instance, a background strategy, a mode and a
/// population size. Optional fields fall back to substrate defaults through
/// the accessor methods, so a manifest only has to state what it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub scenario_id: String,
    pub substrate_id: String,
    pub mode: Mode,
    pub background_strategy_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<BTreeSet<Tag>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theoretical_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theoretical_max: Option<f64>,
    #[serde(default)]
    pub phase: Phase,
    #[serde(default)]
    pub params: SubstrateParams,
}

impl ScenarioSpec {
    pub fn new(
        scenario_id: impl Into<String>,
        substrate: SubstrateId,
        mode: Mode,
        background: BackgroundStrategyId,
        phase: Phase,
    ) -> Self {
        ScenarioSpec {
            scenario_id: scenario_id.into(),
            substrate_id: substrate.name().to_string(),
            mode,
            background_strategy_id: background.name().to_string(),
            population_size: None,
            background_count: None,
            horizon: None,
            tags: None,
            theoretical_min: None,
            theoretical_max: None,
            phase,
            params: SubstrateParams::default(),
        }
    }

    pub fn with_population(mut self, n: u32) -> Self {
        self.population_size = Some(n);
        self
    }

    pub fn with_background_count(mut self, k: u32) -> Self {
        self.background_count = Some(k);
        self
    }

    pub fn with_horizon(mut self, horizon: u32) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn with_params(mut self, params: SubstrateParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_bounds(mut self, min: f64, max: f64) -> Self {
        self.theoretical_min = Some(min);
        self.theoretical_max = Some(max);
        self
    }

    pub fn substrate(&self) -> Result<SubstrateId, DomainError> {
        self.substrate_id.parse()
    }

    pub fn background_strategy(&self) -> Result<BackgroundStrategyId, DomainError> {
        self.background_strategy_id.parse()
    }

    pub fn population_size(&self) -> u32 {
        self.population_size.unwrap_or_else(|| {
            self.substrate()
                .map(|s| s.default_population(self.mode))
                .unwrap_or(0)
        })
    }

    /// Resolved background seat count: visitor mode always leaves exactly
    /// one focal seat; resident mode defaults to ⌊n/3⌋.
    pub fn background_count(&self) -> u32 {
        let n = self.population_size();
        match self.mode {
            Mode::Visitor => n.saturating_sub(1),
            Mode::Resident => self.background_count.unwrap_or(n / 3),
        }
    }

    pub fn focal_count(&self) -> u32 {
        self.population_size().saturating_sub(self.background_count())
    }

    pub fn horizon(&self) -> u32 {
        self.horizon.unwrap_or_else(|| {
            self.substrate()
                .map(SubstrateId::default_horizon)
                .unwrap_or(0)
        })
    }

    pub fn tags(&self) -> BTreeSet<Tag> {
        match &self.tags {
            Some(tags) => tags.clone(),
            None => self
                .substrate()
                .map(|s| s.default_tags().iter().copied().collect())
                .unwrap_or_default(),
        }
    }

    /// Normalization bounds: explicit manifest values win, otherwise the
    /// analytic per-seat bounds of the substrate.
    pub fn bounds(&self) -> Result<(f64, f64), DomainError> {
        let (lo, hi) = match (self.theoretical_min, self.theoretical_max) {
            (Some(lo), Some(hi)) => (lo, hi),
            (lo, hi) => {
                let (a, b) = substrates::theoretical_bounds(self)
                    .map_err(|e| DomainError::Composition(e.to_string()))?;
                (lo.unwrap_or(a), hi.unwrap_or(b))
            }
        };
        if !(lo < hi) {
            return Err(DomainError::InvalidBounds { min: lo, max: hi });
        }
        Ok((lo, hi))
    }

    /// Everything that identifies the scenario's content, independent of its
    /// id and phase. Two scenarios with the same fingerprint are the same
    /// game against the same co-players.
    pub fn fingerprint(&self) -> String {
        let tags: Vec<&str> = self.tags().iter().map(|t| t.name()).collect();
        format!(
            "{}|{}|{}|n={}|k={}|h={}|{:?}|{:?}",
            self.substrate_id,
            self.mode,
            self.background_strategy_id,
            self.population_size(),
            self.background_count(),
            self.horizon(),
            self.params,
            tags
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Message,
    Choice,
}

/// Structured action content. Binary choices and declarations are tokens,
/// offers and proposals are numbers; pairwise games also accept one token
/// per co-player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Token(String),
    Tokens(Vec<String>),
    Number(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionAttempt {
    pub kind: ActionKind,
    pub payload: Payload,
}

impl ActionAttempt {
    pub fn choice(token: impl Into<String>) -> Self {
        ActionAttempt {
            kind: ActionKind::Choice,
            payload: Payload::Token(token.into()),
        }
    }

    pub fn message(token: impl Into<String>) -> Self {
        ActionAttempt {
            kind: ActionKind::Message,
            payload: Payload::Token(token.into()),
        }
    }

    pub fn choice_number(value: f64) -> Self {
        ActionAttempt {
            kind: ActionKind::Choice,
            payload: Payload::Number(value),
        }
    }

    pub fn message_number(value: f64) -> Self {
        ActionAttempt {
            kind: ActionKind::Message,
            payload: Payload::Number(value),
        }
    }

    pub fn tokens(kind: ActionKind, tokens: Vec<String>) -> Self {
        ActionAttempt {
            kind,
            payload: Payload::Tokens(tokens),
        }
    }

    pub fn token(&self) -> Option<&str> {
        match &self.payload {
            Payload::Token(t) => Some(t),
            _ => None,
        }
    }

    pub fn number(&self) -> Option<f64> {
        match self.payload {
            Payload::Number(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for ActionAttempt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ActionKind::Message => "message",
            ActionKind::Choice => "choice",
        };
        match &self.payload {
            Payload::Token(t) => write!(f, "{kind} {t}"),
            Payload::Tokens(ts) => write!(f, "{kind} {}", ts.join(" ")),
            Payload::Number(x) => write!(f, "{kind} {x}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLabel {
    Communication,
    Action,
    Outcome,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseLabel::Communication => "communication",
            PhaseLabel::Action => "action",
            PhaseLabel::Outcome => "outcome",
        })
    }
}

/// What an event records. Substrate-specific outcomes carry their numbers
/// so trajectories can be inspected without re-running the episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// The action the Game Master applied for the speaker.
    Act {
        attempt: ActionAttempt,
        cooperative: bool,
    },
    /// The submitted attempt was malformed; `substitute` was applied instead.
    Rejected {
        reason: String,
        substitute: ActionAttempt,
    },
    /// The seat's policy failed; it plays the default action from here on.
    PolicyFault { reason: String },
    Payoff { delta: f64 },
    PubClosed { pub_index: usize },
    TurnedAway { pub_index: usize },
    Deal { price: f64 },
    Walkout,
    NoDeal,
    StrikeTally { strikers: usize, needed: f64 },
    RaiseWon,
    Agreement { share_a: f64 },
    Veto { share: f64 },
    Raid { loss: f64 },
    Usage {
        calls: u32,
        prompt_tokens: u64,
        completion_tokens: u64,
        failures: u32,
    },
    /// A model endpoint call failed; the seat carried on.
    TransportError { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub step: u32,
    pub round: u32,
    pub speaker: Option<usize>,
    #[serde(flatten)]
    pub kind: EventKind,
    /// Seats that observe this event; `None` means everyone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audience: Option<Vec<usize>>,
}

impl Event {
    pub fn visible_to(&self, seat: usize) -> bool {
        self.audience.as_ref().is_none_or(|a| a.contains(&seat))
    }

    pub fn describe(&self) -> String {
        let who = self
            .speaker
            .map(|s| format!("seat {s}"))
            .unwrap_or_else(|| "game master".to_string());
        let what = match &self.kind {
            EventKind::Act { attempt, .. } => format!("{who}: {attempt}"),
            EventKind::Rejected { reason, substitute } => {
                format!("{who}: attempt rejected ({reason}), applied {substitute}")
            }
            EventKind::PolicyFault { reason } => format!("{who}: policy fault ({reason})"),
            EventKind::Payoff { delta } => format!("{who} scored {delta:+}"),
            EventKind::PubClosed { pub_index } => format!("pub {pub_index} is closed this round"),
            EventKind::TurnedAway { pub_index } => format!("{who} found pub {pub_index} closed"),
            EventKind::Deal { price } => format!("{who} closed a deal at {price}"),
            EventKind::Walkout => format!("{who} walked away"),
            EventKind::NoDeal => format!("{who}: no deal"),
            EventKind::StrikeTally { strikers, needed } => {
                format!("{strikers} workers on strike ({needed} needed for a raise)")
            }
            EventKind::RaiseWon => "the boss granted a wage raise".to_string(),
            EventKind::Agreement { share_a } => {
                format!("{who}: alliance agreed, village A carries {share_a} of the burden")
            }
            EventKind::Veto { share } => {
                format!("{who}: constituency refused a burden share of {share}")
            }
            EventKind::Raid { loss } => format!("{who}: raiders struck, loss {loss}"),
            EventKind::Usage {
                calls,
                prompt_tokens,
                completion_tokens,
                failures,
            } => format!(
                "{who}: {calls} model calls, {prompt_tokens}+{completion_tokens} tokens, {failures} failures"
            ),
            EventKind::TransportError { reason } => format!("{who}: model call failed ({reason})"),
        };
        format!("[round {}] {}", self.round, what)
    }
}

/// Everything one seat sees before acting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub seat: usize,
    pub substrate: SubstrateId,
    pub round: u32,
    pub horizon: u32,
    pub phase_label: PhaseLabel,
    pub public_events: Vec<Event>,
    pub private_state: PrivateState,
    /// Legal output for this seat right now; `None` when the seat is not
    /// asked to act.
    pub grammar: Option<ActionGrammar>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub agent: AgentId,
    pub scenario_id: String,
    pub run_index: u32,
    pub role: Role,
    pub raw: f64,
    /// Present for focal records only.
    pub normalized: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Seat<P> {
    pub index: usize,
    pub policy: P,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeatAssignment<P> {
    pub seats: Vec<Seat<P>>,
}

impl<P> SeatAssignment<P> {
    pub fn len(&self) -> usize {
        self.seats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seats.is_empty()
    }

    pub fn focal_seats(&self) -> impl Iterator<Item = &Seat<P>> {
        self.seats.iter().filter(|s| s.role == Role::Focal)
    }

    pub fn count(&self, role: Role) -> usize {
        self.seats.iter().filter(|s| s.role == role).count()
    }
}

/// Min-max normalization onto `[0, 1]` after clamping into the bounds.
/// Negative infinity maps to the minimum; NaN is refused.
pub fn normalize_score(raw: f64, theo_min: f64, theo_max: f64) -> Result<f64, DomainError> {
    if !(theo_min < theo_max) || !theo_min.is_finite() || !theo_max.is_finite() {
        return Err(DomainError::InvalidBounds {
            min: theo_min,
            max: theo_max,
        });
    }
    if raw.is_nan() {
        return Err(DomainError::NanScore);
    }
    let clamped = raw.clamp(theo_min, theo_max);
    Ok(((clamped - theo_min) / (theo_max - theo_min)).clamp(0.0, 1.0))
}

/// Lay out the seats of one episode. Roles are shuffled with the given seed
/// so the role-to-seat mapping is replayable.
pub fn compose_population<P: Clone>(
    spec: &ScenarioSpec,
    focal: &P,
    background: &P,
    seed: u64,
) -> Result<SeatAssignment<P>, DomainError> {
    let n = spec.population_size();
    let k = spec.background_count();
    if n < 2 {
        return Err(DomainError::Composition(format!(
            "population size {n} is below 2"
        )));
    }
    if k < 1 || k >= n {
        return Err(DomainError::Composition(format!(
            "background count {k} must lie in [1, {n})"
        )));
    }
    let focal_count = n - k;
    match spec.mode {
        Mode::Resident if focal_count <= k => {
            return Err(DomainError::Composition(format!(
                "resident mode needs a focal majority, got {focal_count} focal vs {k} background"
            )))
        }
        Mode::Visitor if focal_count != 1 => {
            return Err(DomainError::Composition(format!(
                "visitor mode needs exactly one focal seat, got {focal_count}"
            )))
        }
        _ => {}
    }
    let mut roles: Vec<Role> = std::iter::repeat_n(Role::Focal, focal_count as usize)
        .chain(std::iter::repeat_n(Role::Background, k as usize))
        .collect();
    roles.shuffle(&mut stream(seed));
    let seats = roles
        .into_iter()
        .enumerate()
        .map(|(index, role)| Seat {
            index,
            policy: match role {
                Role::Focal => focal.clone(),
                Role::Background => background.clone(),
            },
            role,
        })
        .collect();
    Ok(SeatAssignment { seats })
}

/// A single invariant violation with a machine-readable code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

impl Violation {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        Violation {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Collect every invariant violation of a scenario. An empty list means the
/// scenario can be composed and run.
pub fn validate_scenario(spec: &ScenarioSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if spec.scenario_id.trim().is_empty() {
        out.push(Violation::new("empty-scenario-id", "scenario id is empty"));
    }
    let substrate = spec.substrate().ok();
    if substrate.is_none() {
        out.push(Violation::new(
            "unknown-substrate",
            format!("unknown substrate '{}'", spec.substrate_id),
        ));
    }
    match (spec.background_strategy(), substrate) {
        (Err(_), _) => out.push(Violation::new(
            "unknown-strategy",
            format!("unknown background strategy '{}'", spec.background_strategy_id),
        )),
        (Ok(strategy), Some(sub)) if !strategy.supports(sub) => out.push(Violation::new(
            "incompatible-strategy",
            format!("{strategy} is not defined for {sub}"),
        )),
        _ => {}
    }

    let n = spec.population_size();
    let k = spec.background_count();
    if n < 2 {
        out.push(Violation::new(
            "population-too-small",
            format!("population size {n} is below 2"),
        ));
    } else {
        if let (Mode::Visitor, Some(explicit)) = (spec.mode, spec.background_count) {
            if explicit != n - 1 {
                out.push(Violation::new(
                    "visitor-background-count",
                    format!("visitor mode seats one focal agent, so background count must be {}", n - 1),
                ));
            }
        }
        if k < 1 || k >= n {
            out.push(Violation::new(
                "invalid-background-count",
                format!("background count {k} must lie in [1, {n})"),
            ));
        } else if spec.mode == Mode::Resident && n - k <= k {
            out.push(Violation::new(
                "focal-not-majority",
                format!("resident mode has {} focal vs {k} background seats", n - k),
            ));
        }
        if let Some(sub) = substrate {
            if sub.is_pairwise() && n % 2 != 0 {
                out.push(Violation::new(
                    "odd-population",
                    format!("{sub} seats players in pairs, population {n} is odd"),
                ));
            }
        }
    }

    if let Some(sub) = substrate {
        if let Err(e) = spec.params.check(sub) {
            out.push(Violation::new("invalid-params", e.to_string()));
        }
    }

    if spec.theoretical_min.is_some() || spec.theoretical_max.is_some() || substrate.is_some() {
        let blocked = out
            .iter()
            .any(|v| v.code == "invalid-params" || v.code == "population-too-small");
        if !blocked {
            if let Err(e) = spec.bounds() {
                out.push(Violation::new("invalid-bounds", e.to_string()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn resident(n: u32, k: u32) -> ScenarioSpec {
        ScenarioSpec::new(
            "s",
            SubstrateId::RealityShow,
            Mode::Resident,
            BackgroundStrategyId::GrimTrigger,
            Phase::Development,
        )
        .with_population(n)
        .with_background_count(k)
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_score(7.0, 2.0, 12.0).unwrap(), 0.5);
        assert_eq!(normalize_score(f64::NEG_INFINITY, 0.0, 10.0).unwrap(), 0.0);
        assert_eq!(normalize_score(10.0, 0.0, 10.0).unwrap(), 1.0);
    }

    #[test]
    fn normalize_errors() {
        assert!(matches!(
            normalize_score(1.0, 3.0, 3.0),
            Err(DomainError::InvalidBounds { .. })
        ));
        assert!(matches!(
            normalize_score(1.0, 4.0, 3.0),
            Err(DomainError::InvalidBounds { .. })
        ));
        assert_eq!(normalize_score(f64::NAN, 0.0, 1.0), Err(DomainError::NanScore));
        assert_eq!(normalize_score(f64::INFINITY, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(normalize_score(-5.0, 0.0, 1.0).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn normalize_is_monotone(a in -1e6f64..1e6, b in -1e6f64..1e6, lo in -1e3f64..1e3, w in 1e-3f64..1e3) {
            let hi = lo + w;
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            let nx = normalize_score(x, lo, hi).unwrap();
            let ny = normalize_score(y, lo, hi).unwrap();
            prop_assert!(nx <= ny);
            prop_assert!((0.0..=1.0).contains(&nx));
        }

        #[test]
        fn normalize_inverts_affine_map(t in 0.0f64..=1.0, lo in -100.0f64..100.0, w in 0.5f64..100.0) {
            let hi = lo + w;
            let got = normalize_score(lo + t * (hi - lo), lo, hi).unwrap();
            prop_assert!((got - t).abs() < 1e-12);
        }

        #[test]
        fn composition_respects_mode(n in 2u32..20, seed in any::<u64>()) {
            let k = (n - 1) / 2;
            if k >= 1 {
                let spec = resident(n, k);
                let seats = compose_population(&spec, &'F', &'B', seed).unwrap();
                prop_assert!(seats.count(Role::Focal) > seats.count(Role::Background));
                prop_assert_eq!(seats.len(), n as usize);
            }
            let visitor = ScenarioSpec { mode: Mode::Visitor, background_count: None, ..resident(n, 1) };
            let seats = compose_population(&visitor, &'F', &'B', seed).unwrap();
            prop_assert_eq!(seats.count(Role::Focal), 1);
        }
    }

    #[test]
    fn compose_examples() {
        let seats = compose_population(&resident(8, 2), &"f", &"b", 7).unwrap();
        assert_eq!(seats.count(Role::Focal), 6);
        assert_eq!(seats.count(Role::Background), 2);

        let visitor = ScenarioSpec {
            mode: Mode::Visitor,
            background_count: None,
            ..resident(5, 1)
        };
        let seats = compose_population(&visitor, &"f", &"b", 7).unwrap();
        assert_eq!(seats.count(Role::Focal), 1);
        assert_eq!(seats.count(Role::Background), 4);

        assert!(matches!(
            compose_population(&resident(2, 1), &"f", &"b", 7),
            Err(DomainError::Composition(_))
        ));
    }

    #[test]
    fn composition_is_replayable() {
        let spec = resident(9, 3);
        let a = compose_population(&spec, &1, &0, 99).unwrap();
        let b = compose_population(&spec, &1, &0, 99).unwrap();
        assert_eq!(a, b);
        let orders: BTreeSet<Vec<Role>> = (0..20)
            .map(|seed| {
                compose_population(&spec, &1, &0, seed)
                    .unwrap()
                    .seats
                    .iter()
                    .map(|s| s.role)
                    .collect()
            })
            .collect();
        assert!(orders.len() > 1, "seed should move roles between seats");
    }

    #[test]
    fn default_background_count_is_a_third() {
        let spec = ScenarioSpec {
            background_count: None,
            ..resident(9, 0)
        };
        assert_eq!(spec.background_count(), 3);
        assert!(validate_scenario(&spec).is_empty());
    }

    fn codes(spec: &ScenarioSpec) -> Vec<&'static str> {
        validate_scenario(spec).into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn validate_examples() {
        assert!(codes(&resident(4, 1)).is_empty());
        assert_eq!(codes(&resident(4, 1).with_bounds(3.0, 3.0)), vec!["invalid-bounds"]);
        let mut unknown = resident(4, 1);
        unknown.substrate_id = "chess".into();
        assert_eq!(codes(&unknown), vec!["unknown-substrate"]);
    }

    #[test]
    fn validate_reports_each_injected_violation() {
        let mut spec = resident(4, 1);
        spec.scenario_id = " ".into();
        assert_eq!(codes(&spec), vec!["empty-scenario-id"]);

        let mut spec = resident(4, 1);
        spec.background_strategy_id = "saboteur".into();
        assert_eq!(codes(&spec), vec!["unknown-strategy"]);

        let mut spec = resident(4, 1);
        spec.background_strategy_id = "stubborn".into();
        assert_eq!(codes(&spec), vec!["incompatible-strategy"]);

        assert_eq!(codes(&resident(1, 1)), vec!["population-too-small"]);
        assert_eq!(codes(&resident(4, 0)), vec!["invalid-background-count"]);
        assert_eq!(codes(&resident(4, 4)), vec!["invalid-background-count"]);
        assert_eq!(codes(&resident(4, 2)), vec!["focal-not-majority"]);

        let visitor = ScenarioSpec {
            mode: Mode::Visitor,
            ..resident(4, 2)
        };
        assert_eq!(codes(&visitor), vec!["visitor-background-count"]);

        let haggling = ScenarioSpec::new(
            "h",
            SubstrateId::Haggling,
            Mode::Resident,
            BackgroundStrategyId::FairSplitter,
            Phase::Development,
        )
        .with_population(5)
        .with_background_count(1);
        assert_eq!(codes(&haggling), vec!["odd-population"]);

        let mut spec = resident(4, 1);
        spec.params.closure_probability = Some(0.5);
        assert_eq!(codes(&spec), vec!["invalid-params"]);

        assert_eq!(codes(&resident(4, 1).with_bounds(5.0, 1.0)), vec!["invalid-bounds"]);
    }

    #[test]
    fn agent_id_rejects_empty() {
        assert_eq!(AgentId::new(""), Err(DomainError::EmptyAgentId));
        assert!(serde_json::from_str::<AgentId>("\"\"").is_err());
        assert_eq!(AgentId::new("taehun").unwrap().as_str(), "taehun");
    }

    #[test]
    fn score_record_json_shape() {
        let rec = ScoreRecord {
            agent: AgentId::new("a").unwrap(),
            scenario_id: "s1".into(),
            run_index: 2,
            role: Role::Focal,
            raw: 3.5,
            normalized: Some(0.25),
        };
        let line = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            line,
            r#"{"agent":"a","scenario_id":"s1","run_index":2,"role":"focal","raw":3.5,"normalized":0.25}"#
        );
        let back: ScoreRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, rec);
    }
}
