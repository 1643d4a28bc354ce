//! Pub coordination: friends on a ring want to end up in the same open pub,
//! each seat also has a favourite. Pubs close at random and only a few seats
//! hear about it, so the message phase is where hidden information spreads.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    event, param_err, payoff_event, ActionGrammar, GrammarForm, PrivateState, Progress, Rules,
    SubstrateError, SubstrateParams, CLOSED_PREFIX,
};
use crate::domain::{ActionAttempt, ActionKind, Event, EventKind, Payload, PhaseLabel, SeededStream};

pub const HOME: &str = "home";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Venue {
    Home,
    Pub(usize),
}

impl Venue {
    pub fn token(self) -> String {
        match self {
            Venue::Home => HOME.to_string(),
            Venue::Pub(j) => pub_name(j),
        }
    }

    pub fn parse(token: &str) -> Option<Venue> {
        if token == HOME {
            return Some(Venue::Home);
        }
        token.strip_prefix("pub")?.parse().ok().map(Venue::Pub)
    }
}

pub fn pub_name(j: usize) -> String {
    format!("pub{j}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub pubs: usize,
    pub closure_probability: f64,
    pub witnesses: usize,
    pub preference_bonus: f64,
    pub friend_bonus: f64,
}

impl Config {
    pub fn from_params(p: &SubstrateParams) -> Result<Config, SubstrateError> {
        let c = Config {
            pubs: p.pubs.unwrap_or(2) as usize,
            closure_probability: p.closure_probability.unwrap_or(0.2),
            witnesses: p.closure_witnesses.unwrap_or(2) as usize,
            preference_bonus: p.preference_bonus.unwrap_or(1.0),
            friend_bonus: p.friend_bonus.unwrap_or(2.0),
        };
        if c.pubs == 0 {
            return Err(param_err("pubs must be at least 1"));
        }
        if !(0.0..=1.0).contains(&c.closure_probability) {
            return Err(param_err("closure_probability must lie in [0, 1]"));
        }
        if !(c.preference_bonus >= 0.0 && c.friend_bonus >= 0.0) {
            return Err(param_err("pub bonuses must be non-negative"));
        }
        Ok(c)
    }

    pub fn bounds(&self, n: usize, horizon: u32) -> (f64, f64) {
        let friends = n.saturating_sub(1).min(2) as f64;
        (0.0, horizon as f64 * (self.preference_bonus + self.friend_bonus * friends))
    }
}

/// Ring friendship: each seat's neighbours.
pub fn friends(n: usize, seat: usize) -> Vec<usize> {
    let mut out = vec![(seat + n - 1) % n, (seat + 1) % n];
    out.sort_unstable();
    out.dedup();
    out.retain(|&f| f != seat);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PubGame {
    config: Config,
    preferred: Vec<usize>,
    closed: Vec<bool>,
    /// Seats told about each pub's closure this round.
    witnesses: Vec<Vec<usize>>,
    declarations: Vec<Option<Venue>>,
    reports: Vec<Vec<usize>>,
    last_attendance: Vec<Option<Venue>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PubView {
    pub pubs: usize,
    pub preferred: usize,
    pub friends: Vec<usize>,
    /// Pubs this seat has been told are closed this round.
    pub known_closed: Vec<usize>,
    pub declarations: Vec<Option<Venue>>,
    /// Closure reports made this round, by seat.
    pub reported_closed: Vec<Vec<usize>>,
    pub last_attendance: Vec<Option<Venue>>,
    pub preference_bonus: f64,
    pub friend_bonus: f64,
    pub score: f64,
}

impl PubView {
    /// Pubs reported closed by anyone this round, plus those known closed.
    pub fn believed_closed(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .reported_closed
            .iter()
            .flatten()
            .chain(&self.known_closed)
            .copied()
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn parse_message(attempt: &ActionAttempt) -> (Venue, Vec<usize>) {
    let (first, rest): (&str, &[String]) = match &attempt.payload {
        Payload::Token(t) => (t, &[]),
        Payload::Tokens(ts) if !ts.is_empty() => (&ts[0], &ts[1..]),
        _ => (HOME, &[]),
    };
    let reports = rest
        .iter()
        .filter_map(|r| match Venue::parse(r.strip_prefix(CLOSED_PREFIX)?) {
            Some(Venue::Pub(j)) => Some(j),
            _ => None,
        })
        .collect();
    (Venue::parse(first).unwrap_or(Venue::Home), reports)
}

impl PubGame {
    pub(crate) fn new(config: Config, n: usize, horizon: u32, rng: &mut SeededStream) -> PubGame {
        let mut preferred: Vec<usize> = (0..n).map(|i| i % config.pubs).collect();
        preferred.shuffle(rng);
        let mut game = PubGame {
            closed: vec![false; config.pubs],
            witnesses: vec![Vec::new(); config.pubs],
            config,
            preferred,
            declarations: vec![None; n],
            reports: vec![Vec::new(); n],
            last_attendance: vec![None; n],
        };
        if horizon > 0 {
            game.draw_closures(n, rng);
        }
        game
    }

    fn draw_closures(&mut self, n: usize, rng: &mut SeededStream) {
        for j in 0..self.config.pubs {
            self.closed[j] = rng.gen_bool(self.config.closure_probability);
            self.witnesses[j] = if self.closed[j] {
                let mut w = index::sample(rng, n, self.config.witnesses.min(n)).into_vec();
                w.sort_unstable();
                w
            } else {
                Vec::new()
            };
        }
    }

    fn known_closed(&self, seat: usize) -> Vec<usize> {
        (0..self.config.pubs)
            .filter(|&j| self.closed[j] && self.witnesses[j].contains(&seat))
            .collect()
    }

    fn venues(&self) -> Vec<String> {
        (0..self.config.pubs)
            .map(pub_name)
            .chain(std::iter::once(HOME.to_string()))
            .collect()
    }
}

impl Rules for PubGame {
    fn awaiting(&self, p: &Progress) -> Vec<usize> {
        (0..p.seats).collect()
    }

    fn grammar(&self, p: &Progress, _seat: usize) -> ActionGrammar {
        match p.phase {
            PhaseLabel::Communication => ActionGrammar {
                kind: ActionKind::Message,
                form: GrammarForm::PubMessage {
                    venues: self.venues(),
                    pubs: (0..self.config.pubs).map(pub_name).collect(),
                },
                default: ActionAttempt::message(HOME),
            },
            _ => {
                let venues = self.venues();
                let refs: Vec<&str> = venues.iter().map(String::as_str).collect();
                ActionGrammar::tokens(ActionKind::Choice, &refs, HOME)
            }
        }
    }

    fn cooperative(&self, p: &Progress, seat: usize, attempt: &ActionAttempt) -> bool {
        let known = self.known_closed(seat);
        match p.phase {
            PhaseLabel::Communication => {
                let (venue, reports) = parse_message(attempt);
                let truthful = reports.iter().all(|&j| self.closed[j]);
                let forthcoming = known.iter().all(|j| reports.contains(j));
                let consistent = !matches!(venue, Venue::Pub(j) if known.contains(&j));
                truthful && forthcoming && consistent
            }
            _ => match attempt.token().and_then(Venue::parse) {
                Some(Venue::Pub(j)) if !known.contains(&j) => match self.declarations[seat] {
                    Some(Venue::Pub(d)) if d == j => true,
                    Some(Venue::Pub(d)) => self.reports.iter().flatten().any(|&r| r == d),
                    _ => false,
                },
                // staying home keeps one's word, or is all that is left
                Some(Venue::Home) => {
                    self.declarations[seat] == Some(Venue::Home)
                        || (0..self.config.pubs).all(|j| {
                            known.contains(&j) || self.reports.iter().flatten().any(|&r| r == j)
                        })
                }
                _ => false,
            },
        }
    }

    fn advance(
        &mut self,
        p: &mut Progress,
        acts: &[(usize, ActionAttempt)],
        rng: &mut SeededStream,
        events: &mut Vec<Event>,
    ) {
        let n = p.seats;
        match p.phase {
            PhaseLabel::Communication => {
                for (seat, attempt) in acts {
                    let (venue, reports) = parse_message(attempt);
                    self.declarations[*seat] = Some(venue);
                    self.reports[*seat] = reports;
                }
                p.phase = PhaseLabel::Action;
            }
            _ => {
                let mut attendance = vec![Venue::Home; n];
                for (seat, attempt) in acts {
                    attendance[*seat] = attempt.token().and_then(Venue::parse).unwrap_or(Venue::Home);
                }
                for seat in 0..n {
                    let gain = match attendance[seat] {
                        Venue::Home => 0.0,
                        Venue::Pub(j) if self.closed[j] => {
                            events.push(event(
                                Some(seat),
                                EventKind::TurnedAway { pub_index: j },
                                None,
                            ));
                            0.0
                        }
                        Venue::Pub(j) => {
                            let pref = if self.preferred[seat] == j {
                                self.config.preference_bonus
                            } else {
                                0.0
                            };
                            let together = friends(n, seat)
                                .into_iter()
                                .filter(|&f| attendance[f] == Venue::Pub(j))
                                .count();
                            pref + self.config.friend_bonus * together as f64
                        }
                    };
                    p.scores[seat] += gain;
                    events.push(payoff_event(seat, gain));
                }
                self.last_attendance = attendance.into_iter().map(Some).collect();
                self.declarations = vec![None; n];
                self.reports = vec![Vec::new(); n];
                p.end_round(PhaseLabel::Communication);
                if !p.finished {
                    self.draw_closures(n, rng);
                    for j in 0..self.config.pubs {
                        if self.closed[j] {
                            events.push(event(
                                None,
                                EventKind::PubClosed { pub_index: j },
                                Some(self.witnesses[j].clone()),
                            ));
                        }
                    }
                }
            }
        }
    }

    fn view(&self, p: &Progress, seat: usize) -> PrivateState {
        PrivateState::PubCoordination(PubView {
            pubs: self.config.pubs,
            preferred: self.preferred[seat],
            friends: friends(p.seats, seat),
            known_closed: self.known_closed(seat),
            declarations: self.declarations.clone(),
            reported_closed: self.reports.clone(),
            last_attendance: self.last_attendance.clone(),
            preference_bonus: self.config.preference_bonus,
            friend_bonus: self.config.friend_bonus,
            score: p.scores[seat],
        })
    }
}
