use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Match, Method, RankingError, RankingTable};
use crate::domain::AgentId;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloConfig {
    pub k_factor: f64,
    pub initial: f64,
}

impl Default for EloConfig {
    fn default() -> Self {
        EloConfig {
            k_factor: 32.0,
            initial: 1500.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EloRatings {
    pub ratings: BTreeMap<AgentId, f64>,
    /// Sum of all ratings after each update, in match order.
    pub sums: Vec<f64>,
}

fn expected(ra: f64, rb: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((rb - ra) / 400.0))
}

/// Sequential Elo over `matches` in the given order. Every agent named in
/// any match starts at `initial`.
pub fn elo_ratings(matches: &[Match], config: EloConfig) -> Result<EloRatings, RankingError> {
    if matches.is_empty() {
        return Err(RankingError::NoComparisons);
    }
    let mut ratings: BTreeMap<AgentId, f64> = BTreeMap::new();
    for m in matches {
        ratings.entry(m.a.clone()).or_insert(config.initial);
        ratings.entry(m.b.clone()).or_insert(config.initial);
    }
    let mut sums = Vec::with_capacity(matches.len());
    for m in matches {
        let ra = ratings[&m.a];
        let rb = ratings[&m.b];
        let delta = config.k_factor * (m.outcome - expected(ra, rb));
        // the loser's change is the exact negation so the total is unchanged
        *ratings.get_mut(&m.a).expect("seeded") = ra + delta;
        *ratings.get_mut(&m.b).expect("seeded") = rb - delta;
        sums.push(ratings.values().sum());
    }
    Ok(EloRatings { ratings, sums })
}

pub fn elo_table(elo: &EloRatings) -> RankingTable {
    RankingTable::from_scores(Method::Elo, elo.ratings.iter().map(|(a, r)| (a.clone(), *r)).collect())
}
