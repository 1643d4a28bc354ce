use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::lottery::tiered;
use super::{Method, PairwiseMatrix, RankingError, RankingTable, DEFAULT_EPSILON};
use crate::domain::{AgentId, Role, ScoreRecord};

/// One (scenario, run) group read as a vote: a weak order over the focal
/// agents that took part, best first, each inner group tied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ballot {
    pub scenario_id: String,
    pub run_index: u32,
    pub ranking: Vec<Vec<AgentId>>,
}

impl Ballot {
    fn position(&self, agent: &AgentId) -> Option<usize> {
        self.ranking.iter().position(|g| g.contains(agent))
    }
}

/// Ballots from focal raw scores; scores within `DEFAULT_EPSILON` tie.
pub fn ballots(records: &[ScoreRecord]) -> Vec<Ballot> {
    let mut groups: BTreeMap<(&str, u32), BTreeMap<&AgentId, f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.role == Role::Focal) {
        groups
            .entry((r.scenario_id.as_str(), r.run_index))
            .or_default()
            .insert(&r.agent, r.raw);
    }
    groups
        .into_iter()
        .map(|((scenario, run), scores)| {
            let mut sorted: Vec<_> = scores.into_iter().collect();
            sorted.sort_by(|(a, x), (b, y)| y.total_cmp(x).then_with(|| a.cmp(b)));
            let mut ranking: Vec<Vec<AgentId>> = Vec::new();
            let mut last = f64::NAN;
            for (agent, score) in sorted {
                match ranking.last_mut() {
                    Some(group) if (last - score).abs() <= DEFAULT_EPSILON => group.push(agent.clone()),
                    _ => ranking.push(vec![agent.clone()]),
                }
                last = score;
            }
            Ballot {
                scenario_id: scenario.to_string(),
                run_index: run,
                ranking,
            }
        })
        .collect()
}

/// Each ballot contributes one comparison per pair of agents on it; the
/// resulting matrix is ranked by iterated maximal lotteries.
pub fn evaluation_without_aggregation(records: &[ScoreRecord]) -> Result<RankingTable, RankingError> {
    let ballots = ballots(records);
    if ballots.is_empty() {
        return Err(RankingError::NoComparisons);
    }
    let agents: BTreeSet<AgentId> = ballots.iter().flat_map(|b| b.ranking.iter().flatten().cloned()).collect();
    let mut matrix = PairwiseMatrix::new(agents.into_iter().collect());
    for ballot in &ballots {
        let on: Vec<(usize, usize)> = matrix
            .agents
            .iter()
            .enumerate()
            .filter_map(|(i, a)| ballot.position(a).map(|p| (i, p)))
            .collect();
        for (x, &(i, pi)) in on.iter().enumerate() {
            for &(j, pj) in &on[x + 1..] {
                // lower position is better
                matrix.record(i, j, pj.cmp(&pi));
            }
        }
    }
    tiered(&matrix, Method::Ewa)
}
