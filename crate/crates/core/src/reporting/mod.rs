//! Descriptive statistics over score records and side-by-side comparison
//! of ranking tables.

mod compare;
mod correlation;

use serde::{Deserialize, Serialize};

use crate::domain::{ScenarioSpec, ScoreRecord};
use crate::ranking::RankingTable;
use crate::tournament::summary::{summarize, Stat};

pub use compare::{comparative_report, kendall_tau, ComparativeReport, ReportError};
pub use correlation::{pearson, tag_correlations, Feature, TagCorrelation};

/// Per-scenario focal means, highest first.
pub fn scenario_summary(records: &[ScoreRecord]) -> Vec<Stat> {
    sorted_desc(summarize(records).per_scenario)
}

/// Per-agent focal means, highest first.
pub fn agent_summary(records: &[ScoreRecord]) -> Vec<Stat> {
    sorted_desc(summarize(records).per_agent)
}

fn sorted_desc(mut stats: Vec<Stat>) -> Vec<Stat> {
    stats.sort_by(|a, b| b.mean.total_cmp(&a.mean).then_with(|| a.key.cmp(&b.key)));
    stats
}

fn stat_table(title: &str, key: &str, stats: &[Stat]) -> String {
    let mut out = format!("## {title}\n\n| {key} | Mean | SE | Count |\n|:---|---:|---:|---:|\n");
    for s in stats {
        out.push_str(&format!("| {} | {:.4} | {:.4} | {} |\n", s.key, s.mean, s.se, s.count));
    }
    out
}

/// Everything that goes into a report, ready to render.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub agents: Vec<Stat>,
    pub scenarios: Vec<Stat>,
    /// `None` when no record could be matched to a known scenario.
    pub correlations: Option<Vec<TagCorrelation>>,
    pub comparison: Option<ComparativeReport>,
}

pub fn build_report(
    records: &[ScoreRecord],
    scenarios: &[ScenarioSpec],
    tables: &[RankingTable],
) -> Result<Report, ReportError> {
    let known = records
        .iter()
        .any(|r| scenarios.iter().any(|s| s.scenario_id == r.scenario_id));
    Ok(Report {
        agents: agent_summary(records),
        scenarios: scenario_summary(records),
        correlations: known.then(|| tag_correlations(records, scenarios)),
        comparison: if tables.is_empty() {
            None
        } else {
            Some(comparative_report(tables)?)
        },
    })
}

impl Report {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Tournament report\n\n");
        out.push_str(&stat_table("Agent means", "Agent", &self.agents));
        out.push('\n');
        out.push_str(&stat_table("Scenario means", "Scenario", &self.scenarios));
        out.push_str("\n## Tag correlations\n\n");
        match &self.correlations {
            None => out.push_str("_absent: no record belongs to a scenario with known tags_\n"),
            Some(cs) if cs.is_empty() => {
                out.push_str("_absent: every indicator or the scores had zero variance_\n")
            }
            Some(cs) => {
                out.push_str("| Feature | Pearson r | Records |\n|:---|---:|---:|\n");
                for c in cs {
                    out.push_str(&format!("| {} | {:.4} | {} |\n", c.feature, c.pearson_r, c.sample_count));
                }
            }
        }
        out.push_str(
            "\nScores are min–max normalized per scenario. Correlations are descriptive; \
             no regression model or latent-ability estimate is fitted.\n",
        );
        out.push_str("\n## Method agreement\n\n");
        match &self.comparison {
            None => out.push_str("_absent: no ranking tables supplied_\n"),
            Some(c) => out.push_str(&c.to_markdown()),
        }
        out
    }
}
