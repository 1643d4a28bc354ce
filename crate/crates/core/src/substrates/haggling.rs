//! Haggling: seats form seller/buyer pairs, `(0, 1)`, `(2, 3)`, and so on.
//! The seller's cost and the buyer's value are private draws; the two
//! alternate offers, starting with the seller, until one side accepts,
//! someone walks away, or the rounds run out.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    event, param_err, payoff_event, ActionGrammar, GrammarForm, PrivateState, Progress, Rules,
    SubstrateError, SubstrateParams,
};
use crate::domain::{ActionAttempt, ActionKind, Event, EventKind, Payload, PhaseLabel, SeededStream};

pub const ACCEPT: &str = "accept";
pub const WALK: &str = "walk";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trader {
    Seller,
    Buyer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub cost_range: [f64; 2],
    pub value_range: [f64; 2],
    pub granularity: f64,
}

fn grid_ok(x: f64, g: f64) -> bool {
    let k = x / g;
    (k - k.round()).abs() < 1e-6
}

impl Config {
    pub fn from_params(p: &SubstrateParams) -> Result<Config, SubstrateError> {
        let c = Config {
            cost_range: p.cost_range.unwrap_or([2.0, 6.0]),
            value_range: p.value_range.unwrap_or([8.0, 12.0]),
            granularity: p.granularity.unwrap_or(0.25),
        };
        let [clo, chi] = c.cost_range;
        let [vlo, vhi] = c.value_range;
        if !(c.granularity > 0.0) {
            return Err(param_err("granularity must be positive"));
        }
        if !(clo >= 0.0 && clo <= chi && vlo <= vhi) {
            return Err(param_err("cost and value ranges must be ordered and non-negative"));
        }
        if !(chi < vlo) {
            return Err(param_err("every cost must lie below every value"));
        }
        if ![clo, chi, vlo, vhi].iter().all(|&x| grid_ok(x, c.granularity)) {
            return Err(param_err("range endpoints must lie on the price grid"));
        }
        Ok(c)
    }

    /// A trader's surplus is at most the widest possible gap between value
    /// and cost, reached when the buyer pays the lowest cost.
    pub fn bounds(&self, horizon: u32) -> (f64, f64) {
        if horizon == 0 {
            (0.0, 0.0)
        } else {
            (0.0, self.value_range[1] - self.cost_range[0])
        }
    }

    fn draw(&self, range: [f64; 2], rng: &mut SeededStream) -> f64 {
        let steps = ((range[1] - range[0]) / self.granularity + 1e-9).floor() as u64;
        range[0] + rng.gen_range(0..=steps) as f64 * self.granularity
    }

    /// Snap onto the price grid.
    pub fn snap(&self, x: f64) -> f64 {
        (x / self.granularity).round() * self.granularity
    }

    /// The most extreme opening for each side.
    pub fn opening(&self, role: Trader) -> f64 {
        match role {
            Trader::Seller => self.value_range[1],
            Trader::Buyer => self.cost_range[0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Offer {
    pub seat: usize,
    pub price: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Outcome {
    Deal(f64),
    Walk,
    NoDeal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Pair {
    seller: usize,
    buyer: usize,
    cost: f64,
    value: f64,
    offers: Vec<Offer>,
    outcome: Option<Outcome>,
}

impl Pair {
    fn role(&self, seat: usize) -> Trader {
        if seat == self.seller {
            Trader::Seller
        } else {
            Trader::Buyer
        }
    }

    fn counterpart(&self, seat: usize) -> usize {
        if seat == self.seller {
            self.buyer
        } else {
            self.seller
        }
    }

    fn reservation(&self, seat: usize) -> f64 {
        match self.role(seat) {
            Trader::Seller => self.cost,
            Trader::Buyer => self.value,
        }
    }

    fn last_by(&self, seat: usize) -> Option<f64> {
        self.offers.iter().rev().find(|o| o.seat == seat).map(|o| o.price)
    }

    /// The counterpart's offer, if it is the latest one on the table.
    fn standing_for(&self, seat: usize) -> Option<f64> {
        self.offers
            .last()
            .filter(|o| o.seat != seat)
            .map(|o| o.price)
    }

    fn surplus(&self, seat: usize, price: f64) -> f64 {
        match self.role(seat) {
            Trader::Seller => price - self.cost,
            Trader::Buyer => self.value - price,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Haggling {
    config: Config,
    pairs: Vec<Pair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HagglingView {
    pub role: Trader,
    /// Cost for a seller, value for a buyer.
    pub reservation: f64,
    pub counterpart: usize,
    /// Where the counterpart's private reservation is drawn from.
    pub counterpart_range: [f64; 2],
    pub price_range: [f64; 2],
    pub granularity: f64,
    pub offers: Vec<Offer>,
    /// The counterpart's latest offer, if it is the one on the table.
    pub standing_offer: Option<f64>,
    pub my_last_offer: Option<f64>,
    pub my_turn: bool,
    pub rounds_left: u32,
    pub closed: bool,
    pub score: f64,
}

impl HagglingView {
    pub fn surplus(&self, price: f64) -> f64 {
        match self.role {
            Trader::Seller => price - self.reservation,
            Trader::Buyer => self.reservation - price,
        }
    }

    /// The counterpart's offers, oldest first.
    pub fn counterpart_offers(&self) -> Vec<f64> {
        self.offers
            .iter()
            .filter(|o| o.seat == self.counterpart)
            .map(|o| o.price)
            .collect()
    }

    pub fn my_offers(&self) -> Vec<f64> {
        self.offers
            .iter()
            .filter(|o| o.seat != self.counterpart)
            .map(|o| o.price)
            .collect()
    }

    pub fn snap(&self, x: f64) -> f64 {
        (x / self.granularity).round() * self.granularity
    }

    /// Snap toward the counterpart: down for a seller, up for a buyer.
    pub fn snap_toward_counterpart(&self, x: f64) -> f64 {
        let k = x / self.granularity;
        let k = match self.role {
            Trader::Seller => (k + 1e-9).floor(),
            Trader::Buyer => (k - 1e-9).ceil(),
        };
        k * self.granularity
    }

    /// Snap away from the counterpart: up for a seller, down for a buyer.
    pub fn snap_toward_self(&self, x: f64) -> f64 {
        let k = x / self.granularity;
        let k = match self.role {
            Trader::Seller => (k - 1e-9).ceil(),
            Trader::Buyer => (k + 1e-9).floor(),
        };
        k * self.granularity
    }

    /// Clamp a price into the legal offer range for this trader.
    pub fn legal_offer(&self, x: f64) -> f64 {
        let (lo, hi) = match self.role {
            Trader::Seller => (self.reservation, self.price_range[1]),
            Trader::Buyer => (self.price_range[0], self.reservation),
        };
        x.clamp(lo, hi)
    }

    /// True when `a` is at least as good for me as `b`.
    pub fn weakly_better(&self, a: f64, b: f64) -> bool {
        self.surplus(a) >= self.surplus(b) - 1e-9
    }
}

impl Haggling {
    pub(crate) fn new(config: Config, n: usize, rng: &mut SeededStream) -> Haggling {
        let pairs = (0..n / 2)
            .map(|i| {
                let cost = config.draw(config.cost_range, rng);
                let value = config.draw(config.value_range, rng);
                Pair {
                    seller: 2 * i,
                    buyer: 2 * i + 1,
                    cost,
                    value,
                    offers: Vec::new(),
                    outcome: None,
                }
            })
            .collect();
        Haggling { config, pairs }
    }

    fn pair(&self, seat: usize) -> &Pair {
        &self.pairs[seat / 2]
    }

    fn active(&self, round: u32, pair: &Pair) -> usize {
        if round % 2 == 0 {
            pair.seller
        } else {
            pair.buyer
        }
    }

    /// Private draws for a seat: `(cost, value)` of its pair.
    pub fn draws(&self, seat: usize) -> (f64, f64) {
        let p = self.pair(seat);
        (p.cost, p.value)
    }
}

impl Rules for Haggling {
    fn awaiting(&self, p: &Progress) -> Vec<usize> {
        self.pairs
            .iter()
            .filter(|pair| pair.outcome.is_none())
            .map(|pair| self.active(p.round, pair))
            .collect()
    }

    fn grammar(&self, _p: &Progress, seat: usize) -> ActionGrammar {
        let pair = self.pair(seat);
        let role = pair.role(seat);
        let (min, max) = match role {
            Trader::Seller => (pair.cost, self.config.value_range[1]),
            Trader::Buyer => (self.config.cost_range[0], pair.value),
        };
        let mut tokens = Vec::new();
        if let Some(price) = pair.standing_for(seat) {
            if pair.surplus(seat, price) >= -1e-9 {
                tokens.push(ACCEPT.to_string());
            }
        }
        tokens.push(WALK.to_string());
        let default_price = pair
            .last_by(seat)
            .unwrap_or_else(|| self.config.opening(role));
        ActionGrammar {
            kind: ActionKind::Choice,
            form: GrammarForm::NumberOrToken {
                min,
                max,
                step: self.config.granularity,
                tokens,
            },
            default: ActionAttempt::choice_number(default_price),
        }
    }

    fn cooperative(&self, _p: &Progress, seat: usize, attempt: &ActionAttempt) -> bool {
        let pair = self.pair(seat);
        let role = pair.role(seat);
        match &attempt.payload {
            Payload::Token(t) => t == ACCEPT,
            Payload::Number(x) => {
                let reference = pair
                    .last_by(seat)
                    .unwrap_or_else(|| self.config.opening(role));
                match pair.last_by(pair.counterpart(seat)) {
                    Some(cp) => (x - cp).abs() < (reference - cp).abs() - 1e-9,
                    None => match role {
                        Trader::Seller => *x < reference - 1e-9,
                        Trader::Buyer => *x > reference + 1e-9,
                    },
                }
            }
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
        for (seat, attempt) in acts {
            let pair = &mut self.pairs[seat / 2];
            let audience = Some(vec![pair.seller, pair.buyer]);
            match &attempt.payload {
                Payload::Token(t) if t == ACCEPT => {
                    let price = pair.standing_for(*seat).expect("accept requires a standing offer");
                    pair.outcome = Some(Outcome::Deal(price));
                    events.push(event(Some(*seat), EventKind::Deal { price }, audience));
                    let (s, b) = (pair.seller, pair.buyer);
                    let (gs, gb) = (price - pair.cost, pair.value - price);
                    p.scores[s] += gs;
                    p.scores[b] += gb;
                    events.push(payoff_event(s, gs));
                    events.push(payoff_event(b, gb));
                }
                Payload::Token(_) => {
                    pair.outcome = Some(Outcome::Walk);
                    events.push(event(Some(*seat), EventKind::Walkout, audience));
                }
                Payload::Number(price) => pair.offers.push(Offer {
                    seat: *seat,
                    price: *price,
                }),
                Payload::Tokens(_) => {}
            }
        }
        p.end_round(PhaseLabel::Action);
        if p.finished {
            for pair in self.pairs.iter_mut().filter(|pair| pair.outcome.is_none()) {
                pair.outcome = Some(Outcome::NoDeal);
                events.push(event(None, EventKind::NoDeal, Some(vec![pair.seller, pair.buyer])));
            }
        }
        if self.pairs.iter().all(|pair| pair.outcome.is_some()) {
            p.finished = true;
        }
    }

    fn view(&self, p: &Progress, seat: usize) -> PrivateState {
        let pair = self.pair(seat);
        let role = pair.role(seat);
        PrivateState::Haggling(HagglingView {
            role,
            reservation: pair.reservation(seat),
            counterpart: pair.counterpart(seat),
            counterpart_range: match role {
                Trader::Seller => self.config.value_range,
                Trader::Buyer => self.config.cost_range,
            },
            price_range: [self.config.cost_range[0], self.config.value_range[1]],
            granularity: self.config.granularity,
            offers: pair.offers.clone(),
            standing_offer: pair.standing_for(seat),
            my_last_offer: pair.last_by(seat),
            my_turn: !p.finished && pair.outcome.is_none() && self.active(p.round, pair) == seat,
            rounds_left: p.horizon.saturating_sub(p.round),
            closed: pair.outcome.is_some(),
            score: p.scores[seat],
        })
    }

    fn audience(&self, seat: usize) -> Option<Vec<usize>> {
        let pair = self.pair(seat);
        Some(vec![pair.seller, pair.buyer])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{stream, Mode, Phase, ScenarioSpec};
    use crate::populations::BackgroundStrategyId;
    use crate::substrates::{awaiting, grammar, initial_state, is_cooperative, step, GameState, SubstrateId, SubstrateState};

    fn spec() -> ScenarioSpec {
        ScenarioSpec::new(
            "h",
            SubstrateId::Haggling,
            Mode::Visitor,
            BackgroundStrategyId::FairSplitter,
            Phase::Development,
        )
    }

    fn draws(st: &SubstrateState) -> (f64, f64) {
        match &st.game {
            GameState::Haggling(g) => g.draws(0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn value_always_exceeds_cost() {
        for seed in 0..10_000 {
            let st = initial_state(&spec(), seed).unwrap();
            let (c, v) = draws(&st);
            assert!(v > c);
            assert!((2.0..=6.0).contains(&c) && (8.0..=12.0).contains(&v));
            assert!(grid_ok(c, 0.25) && grid_ok(v, 0.25));
        }
    }

    #[test]
    fn accept_splits_surplus() {
        let st = initial_state(&spec(), 4).unwrap();
        let (c, v) = draws(&st);
        let mut rng = stream(0);
        assert_eq!(awaiting(&st), vec![0]);
        let st = step(&st, &[Some(ActionAttempt::choice_number(7.0)), None], &mut rng)
            .unwrap()
            .state;
        assert_eq!(awaiting(&st), vec![1]);
        let out = step(&st, &[None, Some(ActionAttempt::choice(ACCEPT))], &mut rng).unwrap();
        assert!(out.state.is_finished());
        assert_eq!(out.state.scores(), &[7.0 - c, v - 7.0]);
    }

    #[test]
    fn accept_needs_a_standing_offer() {
        let st = initial_state(&spec(), 4).unwrap();
        let g = grammar(&st, 0).unwrap();
        assert!(g.admits(&ActionAttempt::choice(ACCEPT)).is_err());
        assert!(g.admits(&ActionAttempt::choice(WALK)).is_ok());
        // a seller may not offer below its own cost
        let (c, _) = draws(&st);
        assert!(g.admits(&ActionAttempt::choice_number(c - 0.25)).is_err());
    }

    #[test]
    fn no_deal_scores_zero() {
        let mut st = initial_state(&spec(), 2).unwrap();
        let mut rng = stream(0);
        let mut events = Vec::new();
        while !st.is_finished() {
            let joint: Vec<_> = (0..2)
                .map(|s| crate::substrates::default_action(&st, s))
                .collect();
            let out = step(&st, &joint, &mut rng).unwrap();
            events.extend(out.events);
            st = out.state;
        }
        assert_eq!(st.scores(), &[0.0, 0.0]);
        assert!(events.iter().any(|e| e.kind == EventKind::NoDeal));
        assert_eq!(st.progress.round, 6);
    }

    #[test]
    fn concession_labels() {
        let st = initial_state(&spec(), 4).unwrap();
        assert!(!is_cooperative(&st, 0, &ActionAttempt::choice_number(12.0)));
        assert!(is_cooperative(&st, 0, &ActionAttempt::choice_number(10.0)));
        let mut rng = stream(0);
        let st = step(&st, &[Some(ActionAttempt::choice_number(10.0)), None], &mut rng)
            .unwrap()
            .state;
        let st = step(&st, &[None, Some(ActionAttempt::choice_number(6.0))], &mut rng)
            .unwrap()
            .state;
        // seller at 10, buyer at 6: moving to 9 concedes, staying does not
        assert!(is_cooperative(&st, 0, &ActionAttempt::choice_number(9.0)));
        assert!(!is_cooperative(&st, 0, &ActionAttempt::choice_number(10.0)));
        assert!(!is_cooperative(&st, 0, &ActionAttempt::choice(WALK)));
        assert!(is_cooperative(&st, 0, &ActionAttempt::choice(ACCEPT)));
    }

    #[test]
    fn snapping() {
        let st = initial_state(&spec(), 4).unwrap();
        let PrivateState::Haggling(v) = crate::substrates::observe(&st, 0).private_state else {
            panic!()
        };
        assert_eq!(v.snap_toward_counterpart(7.1), 7.0);
        assert_eq!(v.snap_toward_self(7.1), 7.25);
        assert_eq!(v.snap_toward_counterpart(7.25), 7.25);
    }
}
