use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{Mode, Role, ScenarioSpec, ScoreRecord, Tag};
use crate::substrates::SubstrateId;

/// A binary scenario indicator that scores are correlated against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Tag(Tag),
    Substrate(SubstrateId),
    Resident,
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Tag(t) => write!(f, "tag:{}", t.name()),
            Feature::Substrate(s) => write!(f, "substrate:{}", s.name()),
            Feature::Resident => f.write_str("mode:resident"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagCorrelation {
    pub feature: Feature,
    pub pearson_r: f64,
    pub sample_count: usize,
}

/// Pearson correlation, or `None` when either side has zero variance.
/// The pairs are sorted first so the result does not depend on input order.
pub fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    let mut pairs = pairs.to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlate each tag, substrate and the resident-mode indicator with the
/// normalized focal scores. Records of unknown scenarios are skipped;
/// indicators with no variance are left out.
pub fn tag_correlations(records: &[ScoreRecord], scenarios: &[ScenarioSpec]) -> Vec<TagCorrelation> {
    let by_id: BTreeMap<&str, &ScenarioSpec> = scenarios.iter().map(|s| (s.scenario_id.as_str(), s)).collect();
    let rows: Vec<(&ScenarioSpec, f64)> = records
        .iter()
        .filter(|r| r.role == Role::Focal)
        .filter_map(|r| Some((*by_id.get(r.scenario_id.as_str())?, r.normalized?)))
        .collect();
    let features = Tag::ALL
        .iter()
        .map(|t| Feature::Tag(*t))
        .chain(SubstrateId::ALL.iter().map(|s| Feature::Substrate(*s)))
        .chain(std::iter::once(Feature::Resident));
    features
        .filter_map(|feature| {
            let pairs: Vec<(f64, f64)> = rows
                .iter()
                .map(|(spec, y)| {
                    let on = match feature {
                        Feature::Tag(t) => spec.tags().contains(&t),
                        Feature::Substrate(s) => spec.substrate().ok() == Some(s),
                        Feature::Resident => spec.mode == Mode::Resident,
                    };
                    (if on { 1.0 } else { 0.0 }, *y)
                })
                .collect();
            pearson(&pairs).map(|r| TagCorrelation {
                feature,
                pearson_r: r,
                sample_count: pairs.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let r = pearson(&[(1.0, 0.0), (1.0, 0.2), (0.0, 0.8), (0.0, 1.0)]).unwrap();
        assert!((r + 0.970_142_500_145_332_1).abs() < 1e-12);
        assert_eq!(pearson(&[(1.0, 0.2), (1.0, 0.4)]), None);
        assert_eq!(pearson(&[(0.0, 0.5), (1.0, 0.5)]), None);
    }
}
