use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::domain::{AgentId, Role, ScoreRecord};

/// Normalized scores closer than this count as a tie.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Win and tie counts between every ordered pair of agents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMatrix {
    pub agents: Vec<AgentId>,
    pub wins: Vec<Vec<u64>>,
    pub ties: Vec<Vec<u64>>,
}

impl PairwiseMatrix {
    pub fn new(agents: Vec<AgentId>) -> PairwiseMatrix {
        let n = agents.len();
        PairwiseMatrix {
            agents,
            wins: vec![vec![0; n]; n],
            ties: vec![vec![0; n]; n],
        }
    }

    /// Build from a win matrix alone; no ties.
    pub fn from_wins(agents: Vec<AgentId>, wins: Vec<Vec<u64>>) -> PairwiseMatrix {
        let mut m = PairwiseMatrix::new(agents);
        m.wins = wins;
        m
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn index_of(&self, agent: &AgentId) -> Option<usize> {
        self.agents.iter().position(|a| a == agent)
    }

    /// Record one comparison between `i` and `j`; `outcome` is from `i`'s side.
    pub fn record(&mut self, i: usize, j: usize, outcome: std::cmp::Ordering) {
        match outcome {
            std::cmp::Ordering::Greater => self.wins[i][j] += 1,
            std::cmp::Ordering::Less => self.wins[j][i] += 1,
            std::cmp::Ordering::Equal => {
                self.ties[i][j] += 1;
                self.ties[j][i] += 1;
            }
        }
    }

    /// Number of comparisons recorded over all unordered pairs.
    pub fn comparisons(&self) -> u64 {
        let n = self.len();
        let mut total = 0;
        for i in 0..n {
            for j in i + 1..n {
                total += self.wins[i][j] + self.wins[j][i] + self.ties[i][j];
            }
        }
        total
    }

    pub fn margins(&self) -> MarginMatrix {
        let n = self.len();
        let m = (0..n)
            .map(|i| (0..n).map(|j| self.wins[i][j] as f64 - self.wins[j][i] as f64).collect())
            .collect();
        MarginMatrix { m }
    }

    /// Restrict to the given agent indices, in that order.
    pub fn submatrix(&self, keep: &[usize]) -> PairwiseMatrix {
        PairwiseMatrix {
            agents: keep.iter().map(|&i| self.agents[i].clone()).collect(),
            wins: keep.iter().map(|&i| keep.iter().map(|&j| self.wins[i][j]).collect()).collect(),
            ties: keep.iter().map(|&i| keep.iter().map(|&j| self.ties[i][j]).collect()).collect(),
        }
    }
}

/// `m[i][j] = wins[i][j] − wins[j][i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginMatrix {
    pub m: Vec<Vec<f64>>,
}

impl MarginMatrix {
    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.len();
        self.m.iter().all(|row| row.len() == n)
            && (0..n).all(|i| (0..n).all(|j| (self.m[i][j] + self.m[j][i]).abs() <= 1e-12))
    }
}

/// One pairwise comparison on a shared scenario instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub scenario_id: String,
    pub run_index: u32,
    pub a: AgentId,
    pub b: AgentId,
    /// 1 if `a` won, 0.5 for a tie, 0 if `b` won.
    pub outcome: f64,
}

fn compare(x: f64, y: f64, epsilon: f64) -> std::cmp::Ordering {
    if (x - y).abs() <= epsilon {
        std::cmp::Ordering::Equal
    } else if x > y {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Less
    }
}

type Keyed<'a> = BTreeMap<(&'a str, u32), BTreeMap<&'a AgentId, f64>>;

/// Focal normalized scores grouped by scenario instance. An agent that
/// somehow holds several records for one instance is scored by their mean.
fn by_instance(records: &[ScoreRecord]) -> Keyed<'_> {
    let mut sums: BTreeMap<(&str, u32), BTreeMap<&AgentId, (f64, usize)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.role == Role::Focal) {
        if let Some(x) = r.normalized {
            let e = sums
                .entry((r.scenario_id.as_str(), r.run_index))
                .or_default()
                .entry(&r.agent)
                .or_insert((0.0, 0));
            e.0 += x;
            e.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(k, v)| (k, v.into_iter().map(|(a, (s, n))| (a, s / n as f64)).collect()))
        .collect()
}

/// Every comparison between two agents that share a (scenario, run) key,
/// ordered by scenario, run and then agent pair.
pub fn matches(records: &[ScoreRecord], epsilon: f64) -> Vec<Match> {
    let mut out = Vec::new();
    for ((scenario, run), scores) in by_instance(records) {
        let agents: Vec<_> = scores.iter().collect();
        for (x, (a, sa)) in agents.iter().enumerate() {
            for (b, sb) in &agents[x + 1..] {
                let outcome = match compare(**sa, **sb, epsilon) {
                    std::cmp::Ordering::Greater => 1.0,
                    std::cmp::Ordering::Equal => 0.5,
                    std::cmp::Ordering::Less => 0.0,
                };
                out.push(Match {
                    scenario_id: scenario.to_string(),
                    run_index: run,
                    a: (**a).clone(),
                    b: (**b).clone(),
                    outcome,
                });
            }
        }
    }
    out
}

/// Pairwise matrix over every focal agent in `records`; agents are sorted.
pub fn build_pairwise(records: &[ScoreRecord], epsilon: f64) -> PairwiseMatrix {
    let agents: BTreeSet<AgentId> = records
        .iter()
        .filter(|r| r.role == Role::Focal && r.normalized.is_some())
        .map(|r| r.agent.clone())
        .collect();
    let mut matrix = PairwiseMatrix::new(agents.into_iter().collect());
    let index: BTreeMap<AgentId, usize> = matrix
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect();
    for scores in by_instance(records).values() {
        let agents: Vec<_> = scores.iter().collect();
        for (x, (a, sa)) in agents.iter().enumerate() {
            for (b, sb) in &agents[x + 1..] {
                matrix.record(index[**a], index[**b], compare(**sa, **sb, epsilon));
            }
        }
    }
    matrix
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(agent: &str, scenario: &str, run: u32, x: f64) -> ScoreRecord {
        ScoreRecord {
            agent: AgentId::new(agent).unwrap(),
            scenario_id: scenario.into(),
            run_index: run,
            role: Role::Focal,
            raw: x,
            normalized: Some(x),
        }
    }

    #[test]
    fn examples() {
        let m = build_pairwise(&[rec("A", "s", 0, 0.7), rec("B", "s", 0, 0.3)], DEFAULT_EPSILON);
        assert_eq!(m.wins, vec![vec![0, 1], vec![0, 0]]);

        let m = build_pairwise(&[rec("A", "s", 0, 0.5), rec("B", "s", 0, 0.5)], DEFAULT_EPSILON);
        assert_eq!(m.ties, vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(m.wins, vec![vec![0, 0], vec![0, 0]]);

        let m = build_pairwise(&[rec("A", "s1", 0, 0.5), rec("B", "s2", 0, 0.9)], DEFAULT_EPSILON);
        assert_eq!(m.comparisons(), 0);
    }

    #[test]
    fn background_records_ignored() {
        let mut bg = rec("X", "s", 0, 0.9);
        bg.role = Role::Background;
        bg.normalized = None;
        let m = build_pairwise(&[rec("A", "s", 0, 0.5), bg], DEFAULT_EPSILON);
        assert_eq!(m.agents.len(), 1);
    }

    #[test]
    fn match_order_is_by_key_then_pair() {
        let records = vec![
            rec("C", "s2", 0, 0.1),
            rec("A", "s2", 0, 0.2),
            rec("B", "s1", 1, 0.4),
            rec("A", "s1", 1, 0.4),
        ];
        let ms = matches(&records, DEFAULT_EPSILON);
        let keys: Vec<_> = ms
            .iter()
            .map(|m| (m.scenario_id.as_str(), m.a.as_str(), m.b.as_str(), m.outcome))
            .collect();
        assert_eq!(keys, vec![("s1", "A", "B", 0.5), ("s2", "A", "C", 1.0)]);
    }
}
