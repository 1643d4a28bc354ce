use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::AgentId;
use crate::ranking::{Method, RankingTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("no ranking tables to compare")]
    NoTables,
    #[error("roster mismatch: {method} ranks {detail}")]
    RosterMismatch { method: Method, detail: String },
}

/// Kendall tau-b between two rank vectors over the same agents. `None`
/// when either side ranks everyone equal.
pub fn kendall_tau(a: &[usize], b: &[usize]) -> Option<f64> {
    let n = a.len().min(b.len());
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = (a[i] as i64 - a[j] as i64).signum();
            let db = (b[i] as i64 - b[j] as i64).signum();
            match (da, db) {
                (0, 0) => {}
                (0, _) => ties_a += 1,
                (_, 0) => ties_b += 1,
                _ if da == db => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n1 = (concordant + discordant + ties_a) as f64;
    let n2 = (concordant + discordant + ties_b) as f64;
    if n1 == 0.0 || n2 == 0.0 {
        return None;
    }
    Some((concordant - discordant) as f64 / (n1 * n2).sqrt())
}

/// Ranks of every agent under every method, plus pairwise agreement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparativeReport {
    pub methods: Vec<Method>,
    /// Ordered as in the first table.
    pub agents: Vec<AgentId>,
    /// `ranks[a][m]` is the rank of agent `a` under method `m`.
    pub ranks: Vec<Vec<usize>>,
    /// `tau[m][k]` between methods `m` and `k`.
    pub tau: Vec<Vec<Option<f64>>>,
}

pub fn comparative_report(tables: &[RankingTable]) -> Result<ComparativeReport, ReportError> {
    let first = tables.first().ok_or(ReportError::NoTables)?;
    let roster: BTreeSet<&AgentId> = first.agents().into_iter().collect();
    for t in &tables[1..] {
        let other: BTreeSet<&AgentId> = t.agents().into_iter().collect();
        if other != roster {
            let missing: Vec<_> = roster.difference(&other).map(|a| a.as_str()).collect();
            let extra: Vec<_> = other.difference(&roster).map(|a| a.as_str()).collect();
            return Err(ReportError::RosterMismatch {
                method: t.method,
                detail: format!("missing [{}], extra [{}]", missing.join(", "), extra.join(", ")),
            });
        }
    }
    let agents: Vec<AgentId> = first.agents().into_iter().cloned().collect();
    let ranks: Vec<Vec<usize>> = agents
        .iter()
        .map(|a| tables.iter().map(|t| t.rank_of(a).expect("same roster")).collect())
        .collect();
    let column = |m: usize| ranks.iter().map(|r| r[m]).collect::<Vec<_>>();
    let tau = (0..tables.len())
        .map(|m| (0..tables.len()).map(|k| kendall_tau(&column(m), &column(k))).collect())
        .collect();
    Ok(ComparativeReport {
        methods: tables.iter().map(|t| t.method).collect(),
        agents,
        ranks,
        tau,
    })
}

fn fmt_tau(t: Option<f64>) -> String {
    t.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"))
}

impl ComparativeReport {
    pub fn to_markdown(&self) -> String {
        let names: Vec<&str> = self.methods.iter().map(|m| m.title()).collect();
        let mut out = format!("| Submission | {} |\n|:---|{}\n", names.join(" | "), "---:|".repeat(names.len()));
        for (agent, ranks) in self.agents.iter().zip(&self.ranks) {
            let cells: Vec<String> = ranks.iter().map(|r| r.to_string()).collect();
            out.push_str(&format!("| {} | {} |\n", agent, cells.join(" | ")));
        }
        out.push_str(&format!(
            "\nKendall tau between methods:\n\n| | {} |\n|:---|{}\n",
            names.join(" | "),
            "---:|".repeat(names.len())
        ));
        for (name, row) in names.iter().zip(&self.tau) {
            let cells: Vec<String> = row.iter().map(|t| fmt_tau(*t)).collect();
            out.push_str(&format!("| {} | {} |\n", name, cells.join(" | ")));
        }
        out
    }

    /// Rank matrix as CSV: one row per agent, one column per method.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["agent".to_string()];
        header.extend(self.methods.iter().map(|m| m.name().to_string()));
        w.write_record(&header).expect("in-memory csv write");
        for (agent, ranks) in self.agents.iter().zip(&self.ranks) {
            let mut row = vec![agent.to_string()];
            row.extend(ranks.iter().map(|r| r.to_string()));
            w.write_record(&row).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
    }

    /// Method agreement as CSV: `method_a,method_b,tau`.
    pub fn agreement_csv(&self) -> String {
        let mut out = String::from("method_a,method_b,tau\n");
        for (i, a) in self.methods.iter().enumerate() {
            for (j, b) in self.methods.iter().enumerate() {
                let tau = self.tau[i][j].map_or_else(String::new, |v| v.to_string());
                out.push_str(&format!("{a},{b},{tau}\n"));
            }
        }
        out
    }
}
