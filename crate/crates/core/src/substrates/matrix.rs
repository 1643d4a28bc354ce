//! Two-player binary matrix games used by the reality-show substrate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SubstrateError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    #[serde(alias = "prisoners_dilemma")]
    Pd,
    Chicken,
    StagHunt,
}

impl GameKind {
    pub const ALL: [GameKind; 3] = [GameKind::Pd, GameKind::Chicken, GameKind::StagHunt];

    pub fn name(self) -> &'static str {
        match self {
            GameKind::Pd => "pd",
            GameKind::Chicken => "chicken",
            GameKind::StagHunt => "stag_hunt",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    C,
    D,
}

impl Move {
    pub fn token(self) -> &'static str {
        match self {
            Move::C => "C",
            Move::D => "D",
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Move {
    type Err = SubstrateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "C" => Ok(Move::C),
            "D" => Ok(Move::D),
            other => Err(SubstrateError::Params(format!("'{other}' is not C or D"))),
        }
    }
}

/// Payoffs for the row player, written with the usual letters:
/// `r` mutual cooperation, `s` cooperating against a defector,
/// `t` defecting against a cooperator, `p` mutual defection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffTable {
    pub kind: GameKind,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub p: f64,
}

impl PayoffTable {
    pub fn canonical(kind: GameKind) -> PayoffTable {
        let (r, s, t, p) = match kind {
            GameKind::Pd => (3.0, 0.0, 5.0, 1.0),
            GameKind::Chicken => (2.0, 1.0, 3.0, 0.0),
            GameKind::StagHunt => (4.0, 0.0, 3.0, 2.0),
        };
        PayoffTable::new(kind, r, s, t, p).expect("canonical tables satisfy their orderings")
    }

    /// Build a table, refusing entries that break the ordering that defines
    /// the game kind.
    pub fn new(kind: GameKind, r: f64, s: f64, t: f64, p: f64) -> Result<PayoffTable, SubstrateError> {
        let ok = match kind {
            GameKind::Pd => t > r && r > p && p > s && 2.0 * r > t + s,
            GameKind::Chicken => t > r && r > s && s > p,
            GameKind::StagHunt => r > t && t >= p && p > s,
        };
        if ok {
            Ok(PayoffTable { kind, r, s, t, p })
        } else {
            Err(SubstrateError::Params(format!(
                "payoffs (R={r}, S={s}, T={t}, P={p}) violate the {kind} ordering"
            )))
        }
    }

    pub fn row(&self, me: Move, other: Move) -> f64 {
        match (me, other) {
            (Move::C, Move::C) => self.r,
            (Move::C, Move::D) => self.s,
            (Move::D, Move::C) => self.t,
            (Move::D, Move::D) => self.p,
        }
    }

    pub fn pair(&self, a: Move, b: Move) -> (f64, f64) {
        (self.row(a, b), self.row(b, a))
    }

    pub fn max_entry(&self) -> f64 {
        self.r.max(self.s).max(self.t).max(self.p)
    }

    pub fn min_entry(&self) -> f64 {
        self.r.min(self.s).min(self.t).min(self.p)
    }

    /// Myopic best reply to a known opponent move; ties go to C.
    pub fn best_reply(&self, other: Move) -> Move {
        if self.row(Move::D, other) > self.row(Move::C, other) {
            Move::D
        } else {
            Move::C
        }
    }
}

/// Payoff pair for one joint action under the canonical constants.
pub fn matrix_payoff(kind: GameKind, a: Move, b: Move) -> (f64, f64) {
    PayoffTable::canonical(kind).pair(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_entries() {
        assert_eq!(matrix_payoff(GameKind::Pd, Move::C, Move::C), (3.0, 3.0));
        assert_eq!(matrix_payoff(GameKind::Pd, Move::D, Move::C), (5.0, 0.0));
        assert_eq!(matrix_payoff(GameKind::StagHunt, Move::C, Move::C), (4.0, 4.0));
        assert_eq!(matrix_payoff(GameKind::StagHunt, Move::D, Move::D), (2.0, 2.0));
        assert_eq!(matrix_payoff(GameKind::Chicken, Move::D, Move::D), (0.0, 0.0));
        assert_eq!(matrix_payoff(GameKind::Chicken, Move::C, Move::D), (1.0, 3.0));
    }

    #[test]
    fn chicken_mutual_defection_is_uniquely_worst() {
        let t = PayoffTable::canonical(GameKind::Chicken);
        let dd = t.pair(Move::D, Move::D);
        for a in [Move::C, Move::D] {
            for b in [Move::C, Move::D] {
                if (a, b) != (Move::D, Move::D) {
                    let other = t.pair(a, b);
                    assert!(other.0 > dd.0 && other.1 > dd.1);
                }
            }
        }
    }

    #[test]
    fn symmetric_under_swap() {
        for kind in GameKind::ALL {
            for a in [Move::C, Move::D] {
                for b in [Move::C, Move::D] {
                    assert_eq!(matrix_payoff(kind, a, b).0, matrix_payoff(kind, b, a).1);
                }
            }
        }
    }

    #[test]
    fn orderings_are_enforced() {
        assert!(PayoffTable::new(GameKind::Pd, 3.0, 0.0, 5.0, 1.0).is_ok());
        // 2R must exceed T + S
        assert!(PayoffTable::new(GameKind::Pd, 3.0, 0.0, 7.0, 1.0).is_err());
        assert!(PayoffTable::new(GameKind::StagHunt, 3.0, 0.0, 4.0, 2.0).is_err());
        assert!(PayoffTable::new(GameKind::Chicken, 2.0, 0.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn best_replies() {
        let pd = PayoffTable::canonical(GameKind::Pd);
        assert_eq!(pd.best_reply(Move::C), Move::D);
        let sh = PayoffTable::canonical(GameKind::StagHunt);
        assert_eq!(sh.best_reply(Move::C), Move::C);
        assert_eq!(sh.best_reply(Move::D), Move::D);
        let ch = PayoffTable::canonical(GameKind::Chicken);
        assert_eq!(ch.best_reply(Move::D), Move::C);
    }
}
