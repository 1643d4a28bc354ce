//! Rule-based strategies. Each one reads the seat's private view and the
//! grammar it is offered; the only state kept between calls is what a
//! strategy needs to remember about others' past conduct.

use rand::Rng;

use super::{BackgroundStrategyId as Id, Policy, PolicyError};
use crate::domain::{ActionAttempt, ActionKind, Observation, PhaseLabel, SeededStream};
use crate::substrates::haggling::{ACCEPT as H_ACCEPT, WALK};
use crate::substrates::state_formation::{ACCEPT, PASS, PERSUADE, REJECT, SHARE_STEP};
use crate::substrates::{
    ActionGrammar, GrammarForm, HagglingView, LaborChoice, LaborView, Move, PrivateState,
    PubView, RealityShowView, StateFormationView, SubstrateId, Trader, Venue, CLOSED_PREFIX,
};

/// Own share a stubborn elder insists on.
const STUBBORN_SHARE: f64 = 0.3;
/// Fraction of the expected surplus a stubborn trader demands.
const STUBBORN_GREED: f64 = 0.75;

#[derive(Clone, Debug, Default, PartialEq)]
struct Memory {
    /// Declarations and believed closures seen during the last choice phase.
    pending_pub: Option<(Vec<Option<Venue>>, Vec<usize>)>,
    broke_word_last: Vec<bool>,
    broke_word_ever: Vec<bool>,
    /// Whether a proposal was on the table at the last state-formation vote.
    pending_vote: Option<bool>,
    rejected_last: bool,
    rejected_ever: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scripted {
    id: Id,
    substrate: SubstrateId,
    memory: Memory,
}

impl Scripted {
    pub(crate) fn new(id: Id, substrate: SubstrateId) -> Scripted {
        Scripted {
            id,
            substrate,
            memory: Memory::default(),
        }
    }

    pub fn strategy(&self) -> Id {
        self.id
    }

    fn absorb(&mut self, obs: &Observation) {
        match &obs.private_state {
            PrivateState::PubCoordination(v) if obs.phase_label == PhaseLabel::Communication => {
                if let Some((declared, closed)) = self.memory.pending_pub.take() {
                    let broke: Vec<bool> = declared
                        .iter()
                        .zip(&v.last_attendance)
                        .map(|(d, a)| match (d, a) {
                            (Some(Venue::Pub(d)), Some(a)) => *a != Venue::Pub(*d) && !closed.contains(d),
                            (Some(d), Some(a)) => d != a,
                            _ => false,
                        })
                        .collect();
                    let ever = &mut self.memory.broke_word_ever;
                    ever.resize(broke.len(), false);
                    for (e, b) in ever.iter_mut().zip(&broke) {
                        *e |= *b;
                    }
                    self.memory.broke_word_last = broke;
                }
            }
            PrivateState::StateFormation(v) => {
                if obs.phase_label == PhaseLabel::Communication || obs.phase_label == PhaseLabel::Outcome {
                    if let Some(had_proposal) = self.memory.pending_vote.take() {
                        let rejected = had_proposal && v.counterpart_last_action.as_deref() == Some(REJECT);
                        self.memory.rejected_last = rejected;
                        self.memory.rejected_ever |= rejected;
                    }
                }
            }
            _ => {}
        }
    }
}

impl Policy for Scripted {
    fn reset(&mut self, _seed: u64) {
        self.memory = Memory::default();
    }

    fn observe(&mut self, obs: &Observation) {
        self.absorb(obs);
    }

    fn act(&mut self, obs: &Observation, rng: &mut SeededStream) -> Result<ActionAttempt, PolicyError> {
        if obs.substrate != self.substrate {
            return Err(PolicyError::WrongSubstrate {
                expected: self.substrate,
                got: obs.substrate,
            });
        }
        self.absorb(obs);
        let grammar = obs
            .grammar
            .as_ref()
            .ok_or_else(|| PolicyError::Failed("asked to act without a grammar".into()))?;
        if self.id == Id::Random {
            return Ok(random_attempt(grammar, rng));
        }
        let attempt = match &obs.private_state {
            PrivateState::RealityShow(v) => reality_show(self.id, v, grammar.kind),
            PrivateState::PubCoordination(v) => {
                let a = pub_coordination(self.id, v, grammar.kind, &self.memory);
                if grammar.kind == ActionKind::Choice {
                    self.memory.pending_pub = Some((v.declarations.clone(), v.believed_closed()));
                }
                a
            }
            PrivateState::Haggling(v) => haggling(self.id, v),
            PrivateState::LaborCollectiveAction(v) => labor(self.id, v, grammar.kind, obs.seat),
            PrivateState::StateFormation(v) => {
                let a = state_formation(self.id, v, grammar.kind, &self.memory);
                if grammar.kind == ActionKind::Choice {
                    self.memory.pending_vote = Some(v.proposal_share.is_some());
                }
                a
            }
        };
        Ok(attempt)
    }
}

/// Uniform over the legal attempts described by a grammar.
pub(crate) fn random_attempt(g: &ActionGrammar, rng: &mut SeededStream) -> ActionAttempt {
    let token = |t: &String| ActionAttempt {
        kind: g.kind,
        payload: crate::domain::Payload::Token(t.clone()),
    };
    match &g.form {
        GrammarForm::Tokens { options } => token(&options[rng.gen_range(0..options.len())]),
        GrammarForm::PerOpponent { options, opponents } => ActionAttempt::tokens(
            g.kind,
            opponents
                .iter()
                .map(|_| options[rng.gen_range(0..options.len())].clone())
                .collect(),
        ),
        GrammarForm::PubMessage { venues, .. } => token(&venues[rng.gen_range(0..venues.len())]),
        GrammarForm::NumberOrToken {
            min,
            max,
            step,
            tokens,
        } => {
            let pick = rng.gen_range(0..=tokens.len());
            if pick < tokens.len() {
                token(&tokens[pick])
            } else {
                let steps = ((max - min) / step + 1e-9).floor() as u64;
                let x = min + rng.gen_range(0..=steps) as f64 * step;
                ActionAttempt {
                    kind: g.kind,
                    payload: crate::domain::Payload::Number((x * 1e9).round() / 1e9),
                }
            }
        }
    }
}

fn attempt(kind: ActionKind, token: &str) -> ActionAttempt {
    ActionAttempt {
        kind,
        payload: crate::domain::Payload::Token(token.to_string()),
    }
}

fn reality_show(id: Id, v: &RealityShowView, kind: ActionKind) -> ActionAttempt {
    let planned: Vec<Move> = v
        .opponents
        .iter()
        .map(|&j| match id {
            Id::Defector => Move::D,
            Id::ConditionalCooperator => v.last_against_me[j].unwrap_or(Move::C),
            Id::GrimTrigger if v.defected_against_me[j] => Move::D,
            Id::RationalBaseline => v.payoffs.best_reply(v.last_against_me[j].unwrap_or(Move::C)),
            _ => Move::C,
        })
        .collect();
    match kind {
        ActionKind::Message => {
            let all_c = planned.iter().all(|m| *m == Move::C);
            attempt(kind, if all_c { "C" } else { "D" })
        }
        ActionKind::Choice => {
            if planned.windows(2).all(|w| w[0] == w[1]) {
                attempt(kind, planned.first().copied().unwrap_or(Move::D).token())
            } else {
                ActionAttempt::tokens(kind, planned.iter().map(|m| m.token().to_string()).collect())
            }
        }
    }
}

/// Lowest-numbered pub not excluded, or home if all are.
fn convention(v: &PubView, exclude: &[usize]) -> Venue {
    (0..v.pubs)
        .find(|j| !exclude.contains(j))
        .map(Venue::Pub)
        .unwrap_or(Venue::Home)
}

fn pub_message(kind: ActionKind, venue: Venue, reports: &[usize]) -> ActionAttempt {
    if reports.is_empty() {
        return attempt(kind, &venue.token());
    }
    let mut tokens = vec![venue.token()];
    tokens.extend(
        reports
            .iter()
            .map(|j| format!("{CLOSED_PREFIX}{}", Venue::Pub(*j).token())),
    );
    ActionAttempt::tokens(kind, tokens)
}

/// Cooperative play: declare the conventional pub, pass on closures, then
/// follow the crowd to the most declared pub still believed open.
fn pub_cooperate(v: &PubView, kind: ActionKind) -> ActionAttempt {
    match kind {
        ActionKind::Message => pub_message(kind, convention(v, &v.known_closed), &v.known_closed),
        ActionKind::Choice => {
            let closed = v.believed_closed();
            let mut counts = vec![0usize; v.pubs];
            for d in v.declarations.iter().flatten() {
                if let Venue::Pub(j) = d {
                    if !closed.contains(j) {
                        counts[*j] += 1;
                    }
                }
            }
            let best = (0..v.pubs)
                .filter(|j| counts[*j] > 0)
                .max_by(|a, b| counts[*a].cmp(&counts[*b]).then(b.cmp(a)));
            let venue = best.map(Venue::Pub).unwrap_or_else(|| convention(v, &closed));
            attempt(kind, &venue.token())
        }
    }
}

/// Non-cooperative play: head for the favourite and claim the rest closed.
fn pub_defect(v: &PubView, kind: ActionKind) -> ActionAttempt {
    let fav = Venue::Pub(v.preferred);
    match kind {
        ActionKind::Message => {
            let others: Vec<usize> = (0..v.pubs).filter(|j| *j != v.preferred).collect();
            pub_message(kind, fav, &others)
        }
        ActionKind::Choice => attempt(kind, &fav.token()),
    }
}

/// Best venue assuming everyone repeats last round's attendance; before any
/// history, assume everyone gathers at the conventional pub.
fn pub_best_response(v: &PubView, kind: ActionKind) -> ActionAttempt {
    let closed = match kind {
        ActionKind::Message => v.known_closed.clone(),
        ActionKind::Choice => v.believed_closed(),
    };
    let assumed: Vec<Venue> = v
        .last_attendance
        .iter()
        .map(|a| a.unwrap_or_else(|| convention(v, &[])))
        .collect();
    let gain = |venue: Venue| match venue {
        Venue::Home => 0.0,
        Venue::Pub(j) if closed.contains(&j) => f64::NEG_INFINITY,
        Venue::Pub(j) => {
            let pref = if v.preferred == j { v.preference_bonus } else { 0.0 };
            let friends = v.friends.iter().filter(|f| assumed[**f] == Venue::Pub(j)).count();
            pref + v.friend_bonus * friends as f64
        }
    };
    let mut candidates = vec![convention(v, &closed)];
    candidates.extend((0..v.pubs).map(Venue::Pub));
    candidates.push(Venue::Home);
    let mut best = candidates[0];
    for c in candidates {
        if gain(c) > gain(best) {
            best = c;
        }
    }
    match kind {
        ActionKind::Message => pub_message(kind, best, &v.known_closed),
        ActionKind::Choice => attempt(kind, &best.token()),
    }
}

fn pub_coordination(id: Id, v: &PubView, kind: ActionKind, m: &Memory) -> ActionAttempt {
    match id {
        Id::Defector => pub_defect(v, kind),
        Id::RationalBaseline => pub_best_response(v, kind),
        Id::ConditionalCooperator => {
            let betrayed = v.friends.iter().any(|f| m.broke_word_last.get(*f) == Some(&true));
            if betrayed {
                pub_defect(v, kind)
            } else {
                pub_cooperate(v, kind)
            }
        }
        Id::GrimTrigger if m.broke_word_ever.iter().any(|b| *b) => pub_defect(v, kind),
        _ => pub_cooperate(v, kind),
    }
}

fn mid(r: [f64; 2]) -> f64 {
    (r[0] + r[1]) / 2.0
}

/// Midway between my reservation and the centre of the counterpart's range.
fn fair_price(v: &HagglingView) -> f64 {
    v.legal_offer(v.snap((v.reservation + mid(v.counterpart_range)) / 2.0))
}

fn offer(price: f64) -> ActionAttempt {
    ActionAttempt::choice_number(price)
}

/// True if every offer the counterpart made improved on its previous one.
fn counterpart_always_conceded(v: &HagglingView) -> bool {
    v.counterpart_offers().windows(2).all(|w| match v.role {
        // the counterpart of a seller is a buyer, who concedes upward
        Trader::Seller => w[1] > w[0] + 1e-9,
        Trader::Buyer => w[1] < w[0] - 1e-9,
    })
}

/// Split the remaining gap: halfway between my last offer and the standing
/// one, snapped toward the counterpart.
fn split_the_difference(v: &HagglingView) -> f64 {
    match (v.my_last_offer, v.standing_offer) {
        (Some(last), Some(s)) => v.legal_offer(v.snap_toward_counterpart((last + s) / 2.0)),
        (Some(last), None) => last,
        (None, _) => fair_price(v),
    }
}

fn accept_or(v: &HagglingView, planned: f64) -> ActionAttempt {
    match v.standing_offer {
        Some(s) if v.surplus(s) >= -1e-9 && v.weakly_better(s, planned) => ActionAttempt::choice(H_ACCEPT),
        _ => offer(planned),
    }
}

fn haggling(id: Id, v: &HagglingView) -> ActionAttempt {
    match id {
        Id::NaiveAltruist => match v.standing_offer {
            Some(s) if v.surplus(s) >= -1e-9 => ActionAttempt::choice(H_ACCEPT),
            _ => offer(fair_price(v)),
        },
        Id::Defector => match v.standing_offer {
            Some(_) => ActionAttempt::choice(WALK),
            None => offer(match v.role {
                Trader::Seller => v.price_range[1],
                Trader::Buyer => v.price_range[0],
            }),
        },
        Id::FairSplitter => accept_or(v, split_the_difference(v)),
        Id::GrimTrigger => {
            if counterpart_always_conceded(v) {
                accept_or(v, split_the_difference(v))
            } else {
                ActionAttempt::choice(WALK)
            }
        }
        Id::ConditionalCooperator => {
            let planned = match (v.my_last_offer, v.standing_offer) {
                (Some(last), Some(s)) => {
                    let cp = v.counterpart_offers();
                    let step = if cp.len() >= 2 {
                        let (prev, now) = (cp[cp.len() - 2], cp[cp.len() - 1]);
                        match v.role {
                            Trader::Seller => (now - prev).max(0.0),
                            Trader::Buyer => (prev - now).max(0.0),
                        }
                    } else {
                        (last - s).abs() / 2.0
                    };
                    let moved = match v.role {
                        Trader::Seller => (last - step).max(s),
                        Trader::Buyer => (last + step).min(s),
                    };
                    v.legal_offer(v.snap(moved))
                }
                (Some(last), None) => last,
                (None, _) => fair_price(v),
            };
            accept_or(v, planned)
        }
        Id::Stubborn => {
            let demand = match v.role {
                Trader::Seller => {
                    v.reservation + STUBBORN_GREED * (mid(v.counterpart_range) - v.reservation)
                }
                Trader::Buyer => {
                    v.reservation - STUBBORN_GREED * (v.reservation - mid(v.counterpart_range))
                }
            };
            accept_or(v, v.legal_offer(v.snap_toward_self(demand)))
        }
        Id::RationalBaseline => match (v.standing_offer, v.my_last_offer) {
            (Some(s), _) if v.surplus(s) >= -1e-9 => ActionAttempt::choice(H_ACCEPT),
            (_, Some(last)) => offer(last),
            (_, None) => offer(v.legal_offer(match v.role {
                Trader::Seller => v.counterpart_range[0],
                Trader::Buyer => v.counterpart_range[1],
            })),
        },
        Id::Random => unreachable!("random play is handled before dispatch"),
    }
}

fn labor(id: Id, v: &LaborView, kind: ActionKind, seat: usize) -> ActionAttempt {
    let choice = if v.raise_won {
        match id {
            Id::Random => unreachable!("random play is handled before dispatch"),
            _ => LaborChoice::Work,
        }
    } else {
        match id {
            Id::Defector | Id::RationalBaseline => LaborChoice::Work,
            Id::ConditionalCooperator => {
                let co_workers: Vec<LaborChoice> = v
                    .yesterday
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != seat)
                    .filter_map(|(_, c)| *c)
                    .collect();
                let strikers = co_workers.iter().filter(|c| **c == LaborChoice::Strike).count();
                if co_workers.is_empty() || 2 * strikers >= co_workers.len() {
                    LaborChoice::Strike
                } else {
                    LaborChoice::Work
                }
            }
            Id::GrimTrigger if v.broke_strike.iter().any(|b| *b) => LaborChoice::Work,
            _ => LaborChoice::Strike,
        }
    };
    attempt(kind, choice.token())
}

fn share_attempt(kind: ActionKind, share: f64) -> ActionAttempt {
    ActionAttempt {
        kind,
        payload: crate::domain::Payload::Number(((share / SHARE_STEP).round() * SHARE_STEP * 1e9).round() / 1e9),
    }
}

fn sf_cooperate(v: &StateFormationView, kind: ActionKind, max_share: f64) -> ActionAttempt {
    match kind {
        ActionKind::Message => share_attempt(kind, 0.5),
        ActionKind::Choice => match v.proposal_share {
            Some(s) if s > max_share + 1e-9 => attempt(kind, REJECT),
            Some(s) if s <= v.approval_threshold + 1e-9 => attempt(kind, ACCEPT),
            Some(_) => attempt(kind, PERSUADE),
            None => attempt(kind, REJECT),
        },
    }
}

fn sf_defect(kind: ActionKind) -> ActionAttempt {
    match kind {
        ActionKind::Message => attempt(kind, PASS),
        ActionKind::Choice => attempt(kind, REJECT),
    }
}

fn state_formation(id: Id, v: &StateFormationView, kind: ActionKind, m: &Memory) -> ActionAttempt {
    match id {
        Id::Defector => sf_defect(kind),
        Id::ConditionalCooperator if m.rejected_last => sf_defect(kind),
        Id::GrimTrigger if m.rejected_ever => sf_defect(kind),
        Id::FairSplitter => sf_cooperate(v, kind, 0.5),
        Id::Stubborn => match kind {
            ActionKind::Message => share_attempt(kind, STUBBORN_SHARE),
            ActionKind::Choice => match v.proposal_share {
                Some(s) if s <= STUBBORN_SHARE.min(v.approval_threshold) + 1e-9 => attempt(kind, ACCEPT),
                _ => attempt(kind, REJECT),
            },
        },
        Id::RationalBaseline => match kind {
            // leave the counterpart the largest share its constituency could bear
            ActionKind::Message => share_attempt(kind, 1.0 - v.approval_range[1]),
            ActionKind::Choice => match v.proposal_share {
                Some(s) if s <= v.approval_threshold + 1e-9 => attempt(kind, ACCEPT),
                _ => attempt(kind, REJECT),
            },
        },
        _ => sf_cooperate(v, kind, 1.0),
    }
}
