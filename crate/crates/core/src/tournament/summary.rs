//! Means and standard errors of normalized focal scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Role, ScoreRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub key: String,
    pub mean: f64,
    /// Sample standard deviation over the square root of the count; zero
    /// for a single value.
    pub se: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub per_agent: Vec<Stat>,
    pub per_scenario: Vec<Stat>,
}

pub fn mean_se(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Some((mean, (var / n as f64).sqrt()))
}

pub(crate) fn group_stats<'a>(
    records: impl Iterator<Item = (&'a str, f64)>,
) -> Vec<Stat> {
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (k, v) in records {
        groups.entry(k).or_default().push(v);
    }
    groups
        .into_iter()
        .filter_map(|(k, vs)| {
            mean_se(&vs).map(|(mean, se)| Stat {
                key: k.to_string(),
                mean,
                se,
                count: vs.len(),
            })
        })
        .collect()
}

/// Focal records with a normalized score, grouped by agent and by scenario.
pub fn summarize(records: &[ScoreRecord]) -> Summary {
    let focal = || {
        records
            .iter()
            .filter(|r| r.role == Role::Focal)
            .filter_map(|r| r.normalized.map(|n| (r, n)))
    };
    Summary {
        per_agent: group_stats(focal().map(|(r, n)| (r.agent.as_str(), n))),
        per_scenario: group_stats(focal().map(|(r, n)| (r.scenario_id.as_str(), n))),
    }
}
