//! State formation: paired village elders negotiate how to split the burden
//! of a joint defense. Proposals alternate; a deal needs both elders to
//! accept and both constituencies to approve their share. Without a deal
//! by the last round, raiders strike both villages.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    event, param_err, payoff_event, ActionGrammar, GrammarForm, PrivateState, Progress, Rules,
    SubstrateError, SubstrateParams,
};
use crate::domain::{ActionAttempt, ActionKind, Event, EventKind, Payload, PhaseLabel, SeededStream};

pub const PASS: &str = "pass";
pub const ACCEPT: &str = "accept";
pub const REJECT: &str = "reject";
pub const PERSUADE: &str = "persuade";
pub const SHARE_STEP: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Village {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub alliance_value: f64,
    pub defense_cost: f64,
    pub raid_loss: f64,
    pub persuade_cost: f64,
    pub persuade_step: f64,
    pub approval_range: [f64; 2],
}

fn snap_share(x: f64) -> f64 {
    ((x / SHARE_STEP).round() * SHARE_STEP * 1e9).round() / 1e9
}

impl Config {
    pub fn from_params(p: &SubstrateParams) -> Result<Config, SubstrateError> {
        let c = Config {
            alliance_value: p.alliance_value.unwrap_or(3.0),
            defense_cost: p.defense_cost.unwrap_or(2.0),
            raid_loss: p.raid_loss.unwrap_or(2.0),
            persuade_cost: p.persuade_cost.unwrap_or(0.3),
            persuade_step: p.persuade_step.unwrap_or(0.1),
            approval_range: p.approval_range.unwrap_or([0.3, 0.7]),
        };
        if !(c.alliance_value > 0.0 && c.defense_cost >= 0.0 && c.raid_loss >= 0.0) {
            return Err(param_err("alliance_value must be positive, costs and losses non-negative"));
        }
        if !(c.persuade_cost >= 0.0 && c.persuade_step > 0.0) {
            return Err(param_err("persuade_cost must be non-negative and persuade_step positive"));
        }
        let [lo, hi] = c.approval_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(param_err("approval_range must be an ordered sub-interval of [0, 1]"));
        }
        Ok(c)
    }

    /// Payoff of an agreement for the village carrying `share` of the burden.
    pub fn deal_payoff(&self, share: f64) -> f64 {
        self.alliance_value - self.defense_cost * share
    }

    /// Best case: a deal carrying none of the burden. Worst case: persuading
    /// every round and still being raided, or a deal carrying all of it after
    /// persuading in every other round.
    pub fn bounds(&self, horizon: u32) -> (f64, f64) {
        if horizon == 0 {
            return (0.0, 0.0);
        }
        let h = horizon as f64;
        let raided = -self.raid_loss - self.persuade_cost * h;
        let worst_deal = self.deal_payoff(1.0) - self.persuade_cost * (h - 1.0);
        (raided.min(worst_deal), self.alliance_value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Outcome {
    Agreement(f64),
    Raided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Pair {
    a: usize,
    b: usize,
    approval: [f64; 2],
    /// Village A's share under the proposal on the table this round.
    proposal: Option<f64>,
    last_action: [Option<String>; 2],
    outcome: Option<Outcome>,
}

impl Pair {
    fn side(&self, seat: usize) -> usize {
        usize::from(seat != self.a)
    }

    fn seat(&self, side: usize) -> usize {
        if side == 0 {
            self.a
        } else {
            self.b
        }
    }

    fn own_share(&self, seat: usize, share_a: f64) -> f64 {
        if seat == self.a {
            share_a
        } else {
            snap_share(1.0 - share_a)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFormation {
    config: Config,
    pairs: Vec<Pair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFormationView {
    pub village: Village,
    pub counterpart: usize,
    /// Largest burden share my constituency will currently approve.
    pub approval_threshold: f64,
    pub proposer: bool,
    /// My share under the proposal on the table, if any.
    pub proposal_share: Option<f64>,
    pub counterpart_last_action: Option<String>,
    pub alliance_value: f64,
    pub defense_cost: f64,
    pub raid_loss: f64,
    pub persuade_cost: f64,
    pub persuade_step: f64,
    /// Range the constituencies' initial thresholds are drawn from.
    pub approval_range: [f64; 2],
    pub rounds_left: u32,
    pub closed: bool,
    pub score: f64,
}

impl StateFormation {
    pub(crate) fn new(config: Config, n: usize, rng: &mut SeededStream) -> StateFormation {
        let [lo, hi] = config.approval_range;
        let steps = ((hi - lo) / SHARE_STEP + 1e-9).floor() as u64;
        let mut draw = || snap_share(lo + rng.gen_range(0..=steps) as f64 * SHARE_STEP);
        let pairs = (0..n / 2)
            .map(|i| Pair {
                a: 2 * i,
                b: 2 * i + 1,
                approval: [draw(), draw()],
                proposal: None,
                last_action: [None, None],
                outcome: None,
            })
            .collect();
        StateFormation { config, pairs }
    }

    fn pair(&self, seat: usize) -> &Pair {
        &self.pairs[seat / 2]
    }

    fn proposer(round: u32, pair: &Pair) -> usize {
        pair.seat((round % 2) as usize)
    }

    pub fn approval_threshold(&self, seat: usize) -> f64 {
        let pair = self.pair(seat);
        pair.approval[pair.side(seat)]
    }
}

impl Rules for StateFormation {
    fn awaiting(&self, p: &Progress) -> Vec<usize> {
        let open = self.pairs.iter().filter(|pair| pair.outcome.is_none());
        match p.phase {
            PhaseLabel::Communication => open.map(|pair| Self::proposer(p.round, pair)).collect(),
            _ => open.flat_map(|pair| [pair.a, pair.b]).collect(),
        }
    }

    fn grammar(&self, p: &Progress, seat: usize) -> ActionGrammar {
        match p.phase {
            PhaseLabel::Communication => ActionGrammar {
                kind: ActionKind::Message,
                form: GrammarForm::NumberOrToken {
                    min: 0.0,
                    max: 1.0,
                    step: SHARE_STEP,
                    tokens: vec![PASS.into()],
                },
                default: ActionAttempt::message(PASS),
            },
            _ => {
                if self.pair(seat).proposal.is_some() {
                    ActionGrammar::tokens(ActionKind::Choice, &[ACCEPT, REJECT, PERSUADE], REJECT)
                } else {
                    ActionGrammar::tokens(ActionKind::Choice, &[REJECT, PERSUADE], REJECT)
                }
            }
        }
    }

    fn cooperative(&self, _p: &Progress, _seat: usize, attempt: &ActionAttempt) -> bool {
        match &attempt.payload {
            Payload::Number(own_share) => *own_share >= 0.5 - 1e-9,
            Payload::Token(t) => t == ACCEPT || t == PERSUADE,
            Payload::Tokens(_) => false,
        }
    }

    fn advance(
        &mut self,
        p: &mut Progress,
        acts: &[(usize, ActionAttempt)],
        _rng: &mut SeededStream,
        events: &mut Vec<Event>,
    ) {
        match p.phase {
            PhaseLabel::Communication => {
                for (seat, attempt) in acts {
                    let pair = &mut self.pairs[seat / 2];
                    pair.proposal = attempt
                        .number()
                        .map(|own| snap_share(pair.own_share(*seat, own)));
                }
                p.phase = PhaseLabel::Action;
            }
            _ => {
                for pair in self.pairs.iter_mut().filter(|pair| pair.outcome.is_none()) {
                    let audience = Some(vec![pair.a, pair.b]);
                    let mut accepts = 0;
                    for (seat, attempt) in acts.iter().filter(|(s, _)| s / 2 == pair.a / 2) {
                        let side = pair.side(*seat);
                        let token = attempt.token().unwrap_or(REJECT).to_string();
                        if token == PERSUADE {
                            p.scores[*seat] -= self.config.persuade_cost;
                            events.push(payoff_event(*seat, -self.config.persuade_cost));
                            pair.approval[side] =
                                snap_share((pair.approval[side] + self.config.persuade_step).min(1.0));
                        }
                        if token == ACCEPT {
                            accepts += 1;
                        }
                        pair.last_action[side] = Some(token);
                    }
                    let Some(share_a) = pair.proposal.filter(|_| accepts == 2) else {
                        continue;
                    };
                    let mut approved = true;
                    for side in 0..2 {
                        let seat = pair.seat(side);
                        let share = pair.own_share(seat, share_a);
                        if share > pair.approval[side] + 1e-9 {
                            approved = false;
                            events.push(event(Some(seat), EventKind::Veto { share }, audience.clone()));
                        }
                    }
                    if approved {
                        pair.outcome = Some(Outcome::Agreement(share_a));
                        events.push(event(None, EventKind::Agreement { share_a }, audience.clone()));
                        for side in 0..2 {
                            let seat = pair.seat(side);
                            let gain = self.config.deal_payoff(pair.own_share(seat, share_a));
                            p.scores[seat] += gain;
                            events.push(payoff_event(seat, gain));
                        }
                    }
                }
                for pair in &mut self.pairs {
                    pair.proposal = None;
                }
                p.end_round(PhaseLabel::Communication);
                if p.finished {
                    for pair in self.pairs.iter_mut().filter(|pair| pair.outcome.is_none()) {
                        pair.outcome = Some(Outcome::Raided);
                        let loss = self.config.raid_loss;
                        for seat in [pair.a, pair.b] {
                            p.scores[seat] -= loss;
                            events.push(event(Some(seat), EventKind::Raid { loss }, Some(vec![pair.a, pair.b])));
                            events.push(payoff_event(seat, -loss));
                        }
                    }
                }
                if self.pairs.iter().all(|pair| pair.outcome.is_some()) {
                    p.finished = true;
                }
            }
        }
    }

    fn view(&self, p: &Progress, seat: usize) -> PrivateState {
        let pair = self.pair(seat);
        let side = pair.side(seat);
        PrivateState::StateFormation(StateFormationView {
            village: if side == 0 { Village::A } else { Village::B },
            counterpart: pair.seat(1 - side),
            approval_threshold: pair.approval[side],
            proposer: !p.finished && Self::proposer(p.round, pair) == seat,
            proposal_share: pair.proposal.map(|s| pair.own_share(seat, s)),
            counterpart_last_action: pair.last_action[1 - side].clone(),
            alliance_value: self.config.alliance_value,
            defense_cost: self.config.defense_cost,
            raid_loss: self.config.raid_loss,
            persuade_cost: self.config.persuade_cost,
            persuade_step: self.config.persuade_step,
            approval_range: self.config.approval_range,
            rounds_left: p.horizon.saturating_sub(p.round),
            closed: pair.outcome.is_some(),
            score: p.scores[seat],
        })
    }

    fn audience(&self, seat: usize) -> Option<Vec<usize>> {
        let pair = self.pair(seat);
        Some(vec![pair.a, pair.b])
    }
}
