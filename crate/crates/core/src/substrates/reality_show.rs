//! Reality show: every round each contestant plays one binary matrix game
//! against every other contestant. The game kind follows a fixed cycle, and
//! each round opens with a public declaration of intent.

use serde::{Deserialize, Serialize};

use super::matrix::{GameKind, Move, PayoffTable};
use super::{param_err, payoff_event, ActionGrammar, GrammarForm, PrivateState, Progress, Rules, SubstrateError, SubstrateParams};
use crate::domain::{ActionAttempt, ActionKind, Event, Payload, PhaseLabel, SeededStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub games: Vec<GameKind>,
}

impl Config {
    pub fn from_params(p: &SubstrateParams) -> Result<Config, SubstrateError> {
        let games = p
            .games
            .clone()
            .unwrap_or_else(|| vec![GameKind::Pd, GameKind::Chicken, GameKind::StagHunt]);
        if games.is_empty() {
            return Err(param_err("games must list at least one game kind"));
        }
        Ok(Config { games })
    }

    pub fn game(&self, round: u32) -> GameKind {
        self.games[round as usize % self.games.len()]
    }

    /// Each round a seat meets `n - 1` opponents, so its per-round score lies
    /// between `n - 1` times the smallest and largest table entries.
    pub fn bounds(&self, n: usize, horizon: u32) -> (f64, f64) {
        let opponents = n.saturating_sub(1) as f64;
        (0..horizon).fold((0.0, 0.0), |(lo, hi), r| {
            let t = PayoffTable::canonical(self.game(r));
            (lo + opponents * t.min_entry(), hi + opponents * t.max_entry())
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealityShow {
    config: Config,
    intents: Vec<Option<Move>>,
    /// `last[i][j]`: what `i` played against `j` in the previous round.
    last: Vec<Vec<Option<Move>>>,
    /// `defected[i][j]`: `i` has played D against `j` at least once.
    defected: Vec<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealityShowView {
    pub game: GameKind,
    pub payoffs: PayoffTable,
    pub opponents: Vec<usize>,
    /// Declarations made this round, by seat.
    pub intents: Vec<Option<Move>>,
    /// What each seat played against me last round.
    pub last_against_me: Vec<Option<Move>>,
    /// Whether each seat has ever played D against me.
    pub defected_against_me: Vec<bool>,
    /// What I played against each seat last round.
    pub my_last: Vec<Option<Move>>,
    pub score: f64,
}

impl RealityShow {
    pub(crate) fn new(config: Config, n: usize) -> RealityShow {
        RealityShow {
            config,
            intents: vec![None; n],
            last: vec![vec![None; n]; n],
            defected: vec![vec![false; n]; n],
        }
    }

    fn opponents(n: usize, seat: usize) -> Vec<usize> {
        (0..n).filter(|&j| j != seat).collect()
    }

    /// Expand a legal choice into one move per seat (the own entry is unused).
    fn moves(n: usize, seat: usize, attempt: &ActionAttempt) -> Vec<Move> {
        match &attempt.payload {
            Payload::Token(t) => vec![t.parse().unwrap_or(Move::D); n],
            Payload::Tokens(ts) => {
                let mut out = vec![Move::D; n];
                for (j, t) in Self::opponents(n, seat).into_iter().zip(ts) {
                    out[j] = t.parse().unwrap_or(Move::D);
                }
                out
            }
            Payload::Number(_) => vec![Move::D; n],
        }
    }
}

impl Rules for RealityShow {
    fn awaiting(&self, p: &Progress) -> Vec<usize> {
        (0..p.seats).collect()
    }

    fn grammar(&self, p: &Progress, seat: usize) -> ActionGrammar {
        match p.phase {
            PhaseLabel::Communication => ActionGrammar::tokens(ActionKind::Message, &["C", "D"], "D"),
            _ => ActionGrammar {
                kind: ActionKind::Choice,
                form: GrammarForm::PerOpponent {
                    options: vec!["C".into(), "D".into()],
                    opponents: Self::opponents(p.seats, seat),
                },
                default: ActionAttempt::choice("D"),
            },
        }
    }

    fn cooperative(&self, p: &Progress, seat: usize, attempt: &ActionAttempt) -> bool {
        match attempt.kind {
            ActionKind::Message => attempt.token() == Some("C"),
            ActionKind::Choice => Self::moves(p.seats, seat, attempt)
                .iter()
                .enumerate()
                .all(|(j, m)| j == seat || *m == Move::C),
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
                    self.intents[*seat] = attempt.token().and_then(|t| t.parse().ok());
                }
                p.phase = PhaseLabel::Action;
            }
            _ => {
                let table = PayoffTable::canonical(self.config.game(p.round));
                let mut moves = vec![vec![Move::D; n]; n];
                for (seat, attempt) in acts {
                    moves[*seat] = Self::moves(n, *seat, attempt);
                }
                let mut gains = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            gains[i] += table.row(moves[i][j], moves[j][i]);
                            self.last[i][j] = Some(moves[i][j]);
                            self.defected[i][j] |= moves[i][j] == Move::D;
                        }
                    }
                }
                for (seat, g) in gains.into_iter().enumerate() {
                    p.scores[seat] += g;
                    events.push(payoff_event(seat, g));
                }
                self.intents = vec![None; n];
                p.end_round(PhaseLabel::Communication);
            }
        }
    }

    fn view(&self, p: &Progress, seat: usize) -> PrivateState {
        let game = self.config.game(p.round);
        PrivateState::RealityShow(RealityShowView {
            game,
            payoffs: PayoffTable::canonical(game),
            opponents: Self::opponents(p.seats, seat),
            intents: self.intents.clone(),
            last_against_me: (0..p.seats).map(|j| self.last[j][seat]).collect(),
            defected_against_me: (0..p.seats).map(|j| self.defected[j][seat]).collect(),
            my_last: self.last[seat].clone(),
            score: p.scores[seat],
        })
    }
}
