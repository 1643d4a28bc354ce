//! Pairwise preferences and the ranking rules built on them.

mod condorcet;
mod elo;
mod ewa;
mod lottery;
mod pairwise;
mod table;

use thiserror::Error;

use crate::domain::ScoreRecord;

pub use condorcet::{copeland, copeland_scores, locked_edges, ranked_pairs};
pub use elo::{elo_ratings, elo_table, EloConfig, EloRatings};
pub use ewa::{ballots, evaluation_without_aggregation, Ballot};
pub use lottery::{certificate, iterative_maximal_lotteries, maximal_lottery, LOTTERY_EPS, SUPPORT_EPS};
pub use pairwise::{build_pairwise, matches, MarginMatrix, Match, PairwiseMatrix, DEFAULT_EPSILON};
pub use table::{Method, RankingRow, RankingTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankingError {
    #[error("no comparisons")]
    NoComparisons,
    #[error("need at least {need} agents, got {got}")]
    TooFewAgents { need: usize, got: usize },
    #[error("maximal lottery did not converge: {0}")]
    Convergence(String),
    #[error("unknown ranking method '{0}'")]
    UnknownMethod(String),
    #[error("malformed ranking table: {0}")]
    Malformed(String),
}

/// Rank the focal records with one method. `epsilon` is the tie tolerance
/// used when turning score pairs into duels.
pub fn rank(records: &[ScoreRecord], method: Method, epsilon: f64) -> Result<RankingTable, RankingError> {
    match method {
        Method::Elo => Ok(elo_table(&elo_ratings(&matches(records, epsilon), EloConfig::default())?)),
        Method::Ewa => evaluation_without_aggregation(records),
        Method::Copeland | Method::RankedPairs | Method::Iml => {
            let matrix = build_pairwise(records, epsilon);
            if matrix.comparisons() == 0 {
                return Err(RankingError::NoComparisons);
            }
            match method {
                Method::Copeland => copeland(&matrix),
                Method::RankedPairs => ranked_pairs(&matrix),
                _ => iterative_maximal_lotteries(&matrix),
            }
        }
    }
}
