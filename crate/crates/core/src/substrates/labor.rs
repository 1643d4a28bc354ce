//! Labor collective action: every day each worker either works for the day's
//! wage or strikes. Once enough workers strike on the same day the boss
//! grants a raise that everyone working afterwards enjoys, strikers and
//! strike-breakers alike.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    event, param_err, payoff_event, ActionGrammar, PrivateState, Progress, Rules, SubstrateError,
    SubstrateParams,
};
use crate::domain::{ActionAttempt, ActionKind, Event, EventKind, PhaseLabel, SeededStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaborChoice {
    Strike,
    Work,
}

impl LaborChoice {
    pub fn token(self) -> &'static str {
        match self {
            LaborChoice::Strike => "strike",
            LaborChoice::Work => "work",
        }
    }

    pub fn parse(t: &str) -> Option<LaborChoice> {
        match t {
            "strike" => Some(LaborChoice::Strike),
            "work" => Some(LaborChoice::Work),
            _ => None,
        }
    }
}

impl fmt::Display for LaborChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub wage: f64,
    pub raise_bonus: f64,
    pub strike_threshold: f64,
}

impl Config {
    pub fn from_params(p: &SubstrateParams) -> Result<Config, SubstrateError> {
        let c = Config {
            wage: p.wage.unwrap_or(1.0),
            raise_bonus: p.raise_bonus.unwrap_or(0.5),
            strike_threshold: p.strike_threshold.unwrap_or(0.5),
        };
        if !(c.wage > 0.0) || !(c.raise_bonus >= 0.0) {
            return Err(param_err("wage must be positive and raise_bonus non-negative"));
        }
        if !(c.strike_threshold > 0.0 && c.strike_threshold <= 1.0) {
            return Err(param_err("strike_threshold must lie in (0, 1]"));
        }
        Ok(c)
    }

    pub fn needed(&self, workers: usize) -> f64 {
        self.strike_threshold * workers as f64
    }

    /// The best a worker can do is work every day while the others win the
    /// raise on day one. If the others are too few to win it alone, the
    /// worker must strike once to get it, or skip the raise entirely.
    pub fn bounds(&self, workers: usize, days: u32) -> (f64, f64) {
        if days == 0 {
            return (0.0, 0.0);
        }
        let d = days as f64;
        let without_raise = d * self.wage;
        let max = if (workers - 1) as f64 >= self.needed(workers) - 1e-9 {
            without_raise + (d - 1.0) * self.raise_bonus
        } else {
            without_raise.max((d - 1.0) * (self.wage + self.raise_bonus))
        };
        (0.0, max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Labor {
    config: Config,
    raise_won: bool,
    intents: Vec<Option<LaborChoice>>,
    yesterday: Vec<Option<LaborChoice>>,
    broke_strike: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaborView {
    pub workers: usize,
    /// Strikers needed on one day to win the raise.
    pub needed: f64,
    pub raise_won: bool,
    /// Declarations made today, by seat.
    pub intents: Vec<Option<LaborChoice>>,
    pub yesterday: Vec<Option<LaborChoice>>,
    /// Seats that have worked on a day before the raise was won.
    pub broke_strike: Vec<bool>,
    pub wage: f64,
    pub raise_bonus: f64,
    pub days_left: u32,
    pub score: f64,
}

impl Labor {
    pub(crate) fn new(config: Config, n: usize) -> Labor {
        Labor {
            config,
            raise_won: false,
            intents: vec![None; n],
            yesterday: vec![None; n],
            broke_strike: vec![false; n],
        }
    }

    fn choice(attempt: &ActionAttempt) -> LaborChoice {
        attempt
            .token()
            .and_then(LaborChoice::parse)
            .unwrap_or(LaborChoice::Work)
    }
}

impl Rules for Labor {
    fn awaiting(&self, p: &Progress) -> Vec<usize> {
        (0..p.seats).collect()
    }

    fn grammar(&self, p: &Progress, _seat: usize) -> ActionGrammar {
        let kind = match p.phase {
            PhaseLabel::Communication => ActionKind::Message,
            _ => ActionKind::Choice,
        };
        ActionGrammar::tokens(kind, &["strike", "work"], "work")
    }

    fn cooperative(&self, _p: &Progress, _seat: usize, attempt: &ActionAttempt) -> bool {
        match Self::choice(attempt) {
            LaborChoice::Strike => !self.raise_won,
            LaborChoice::Work => self.raise_won,
        }
    }

    fn advance(
        &mut self,
        p: &mut Progress,
        acts: &[(usize, ActionAttempt)],
        _rng: &mut SeededStream,
        events: &mut Vec<Event>,
    ) {
        let n = p.seats;
        match p.phase {
            PhaseLabel::Communication => {
                for (seat, attempt) in acts {
                    self.intents[*seat] = Some(Self::choice(attempt));
                }
                p.phase = PhaseLabel::Action;
            }
            _ => {
                let mut today = vec![LaborChoice::Work; n];
                for (seat, attempt) in acts {
                    today[*seat] = Self::choice(attempt);
                }
                let pay = self.config.wage + if self.raise_won { self.config.raise_bonus } else { 0.0 };
                for (seat, choice) in today.iter().enumerate() {
                    let gain = if *choice == LaborChoice::Work { pay } else { 0.0 };
                    if *choice == LaborChoice::Work && !self.raise_won {
                        self.broke_strike[seat] = true;
                    }
                    p.scores[seat] += gain;
                    events.push(payoff_event(seat, gain));
                }
                let strikers = today.iter().filter(|c| **c == LaborChoice::Strike).count();
                let needed = self.config.needed(n);
                events.push(event(None, EventKind::StrikeTally { strikers, needed }, None));
                if !self.raise_won && strikers as f64 >= needed - 1e-9 {
                    self.raise_won = true;
                    events.push(event(None, EventKind::RaiseWon, None));
                }
                self.yesterday = today.into_iter().map(Some).collect();
                self.intents = vec![None; n];
                p.end_round(PhaseLabel::Communication);
            }
        }
    }

    fn view(&self, p: &Progress, seat: usize) -> PrivateState {
        PrivateState::LaborCollectiveAction(LaborView {
            workers: p.seats,
            needed: self.config.needed(p.seats),
            raise_won: self.raise_won,
            intents: self.intents.clone(),
            yesterday: self.yesterday.clone(),
            broke_strike: self.broke_strike.clone(),
            wage: self.config.wage,
            raise_bonus: self.config.raise_bonus,
            days_left: p.horizon.saturating_sub(p.round),
            score: p.scores[seat],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{stream, Mode, Phase, ScenarioSpec};
    use crate::populations::BackgroundStrategyId;
    use crate::substrates::{initial_state, step, theoretical_bounds, SubstrateId, SubstrateState};

    fn spec() -> ScenarioSpec {
        ScenarioSpec::new(
            "l",
            SubstrateId::LaborCollectiveAction,
            Mode::Visitor,
            BackgroundStrategyId::NaiveAltruist,
            Phase::Development,
        )
    }

    fn day(st: &SubstrateState, choices: &[&str]) -> crate::substrates::StepOutcome {
        let mut rng = stream(0);
        let talk: Vec<_> = choices.iter().map(|c| Some(ActionAttempt::message(*c))).collect();
        let st = step(st, &talk, &mut rng).unwrap().state;
        let act: Vec<_> = choices.iter().map(|c| Some(ActionAttempt::choice(*c))).collect();
        step(&st, &act, &mut rng).unwrap()
    }

    #[test]
    fn below_threshold_no_raise() {
        let st = initial_state(&spec(), 0).unwrap();
        let out = day(&st, &["strike", "strike", "work", "work", "work", "work"]);
        assert!(!out.events.iter().any(|e| e.kind == EventKind::RaiseWon));
        assert_eq!(out.state.scores(), &[0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn raise_pays_from_the_next_day() {
        let st = initial_state(&spec(), 0).unwrap();
        let out = day(&st, &["strike", "strike", "strike", "work", "work", "work"]);
        assert!(out.events.iter().any(|e| e.kind == EventKind::RaiseWon));
        let out = day(&out.state, &["work"; 6]);
        assert_eq!(out.state.scores(), &[1.5, 1.5, 1.5, 2.5, 2.5, 2.5]);
    }

    #[test]
    fn bounds() {
        assert_eq!(theoretical_bounds(&spec()).unwrap(), (0.0, 11.5));
        let c = Config {
            wage: 1.0,
            raise_bonus: 0.5,
            strike_threshold: 1.0,
        };
        // everyone must strike, so the best is one lost day then raised pay
        assert_eq!(c.bounds(6, 8), (0.0, 10.5));
    }
}
