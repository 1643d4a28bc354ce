use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RankingError;
use crate::domain::AgentId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Elo,
    Copeland,
    RankedPairs,
    Iml,
    Ewa,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Elo, Method::Copeland, Method::RankedPairs, Method::Iml, Method::Ewa];

    pub fn name(self) -> &'static str {
        match self {
            Method::Elo => "elo",
            Method::Copeland => "copeland",
            Method::RankedPairs => "ranked_pairs",
            Method::Iml => "iml",
            Method::Ewa => "ewa",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Method::Elo => "Elo",
            Method::Copeland => "Copeland",
            Method::RankedPairs => "Ranked Pairs",
            Method::Iml => "Iterative Maximal Lotteries",
            Method::Ewa => "Evaluation without Aggregation",
        }
    }

    /// Parse a comma-separated list; `all` expands to every method.
    pub fn parse_list(s: &str) -> Result<Vec<Method>, RankingError> {
        let mut out: Vec<Method> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                out.extend(Method::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = RankingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        match key.as_str() {
            "elo" => Ok(Method::Elo),
            "copeland" => Ok(Method::Copeland),
            "ranked_pairs" | "rankedpairs" | "tideman" => Ok(Method::RankedPairs),
            "iml" | "iterative_maximal_lotteries" => Ok(Method::Iml),
            "ewa" | "evaluation_without_aggregation" => Ok(Method::Ewa),
            _ => Err(RankingError::UnknownMethod(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub rank: usize,
    pub agent: AgentId,
    pub score: f64,
}

/// Ordered (rank, agent, score) rows. Ranks are dense: tied agents share a
/// rank and the next group takes the following integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub method: Method,
    pub rows: Vec<RankingRow>,
}

const SCORE_TIE: f64 = 1e-12;

impl RankingTable {
    /// Sort by descending score, breaking ties by agent name; equal scores
    /// share a rank.
    pub fn from_scores(method: Method, mut scores: Vec<(AgentId, f64)>) -> RankingTable {
        scores.sort_by(|(a, x), (b, y)| y.total_cmp(x).then_with(|| a.cmp(b)));
        let mut rows: Vec<RankingRow> = Vec::with_capacity(scores.len());
        for (agent, score) in scores {
            let rank = match rows.last() {
                None => 1,
                Some(prev) if (prev.score - score).abs() <= SCORE_TIE => prev.rank,
                Some(prev) => prev.rank + 1,
            };
            rows.push(RankingRow { rank, agent, score });
        }
        RankingTable { method, rows }
    }

    /// Check that ranks start at 1, never skip, and that scores do not
    /// increase down the table.
    pub fn validate(&self) -> Result<(), RankingError> {
        let mut prev: Option<&RankingRow> = None;
        for row in &self.rows {
            match prev {
                None if row.rank != 1 => {
                    return Err(RankingError::Malformed(format!("first rank is {}", row.rank)))
                }
                Some(p) if row.rank != p.rank && row.rank != p.rank + 1 => {
                    return Err(RankingError::Malformed(format!("rank jumps from {} to {}", p.rank, row.rank)))
                }
                Some(p) if row.score > p.score + SCORE_TIE => {
                    return Err(RankingError::Malformed(format!(
                        "'{}' scores above '{}' but is listed below it",
                        row.agent, p.agent
                    )))
                }
                _ => {}
            }
            prev = Some(row);
        }
        Ok(())
    }

    pub fn agents(&self) -> Vec<&AgentId> {
        self.rows.iter().map(|r| &r.agent).collect()
    }

    pub fn rank_of(&self, agent: &AgentId) -> Option<usize> {
        self.rows.iter().find(|r| &r.agent == agent).map(|r| r.rank)
    }

    pub fn score_of(&self, agent: &AgentId) -> Option<f64> {
        self.rows.iter().find(|r| &r.agent == agent).map(|r| r.score)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
    }

    pub fn from_csv(method: Method, text: &str) -> Result<RankingTable, RankingError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows = rdr
            .deserialize()
            .collect::<Result<Vec<RankingRow>, _>>()
            .map_err(|e| RankingError::Malformed(e.to_string()))?;
        let table = RankingTable { method, rows };
        table.validate()?;
        Ok(table)
    }

    /// Three-column markdown table: Rank / Submission / Score.
    pub fn to_markdown(&self) -> String {
        let decimals = if self.method == Method::Elo { 1 } else { 2 };
        let mut out = String::from("| Rank | Submission | Score |\n|---:|:---|---:|\n");
        for row in &self.rows {
            out.push_str(&format!("| {} | {} | {:.*} |\n", row.rank, row.agent, decimals, row.score));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::new(s).unwrap()
    }

    #[test]
    fn dense_ranks_with_lexicographic_ties() {
        let t = RankingTable::from_scores(
            Method::Copeland,
            vec![(id("c"), 0.0), (id("b"), 1.5), (id("a"), 1.5)],
        );
        let got: Vec<_> = t.rows.iter().map(|r| (r.rank, r.agent.as_str())).collect();
        assert_eq!(got, vec![(1, "a"), (1, "b"), (2, "c")]);
        t.validate().unwrap();
    }

    #[test]
    fn csv_round_trip() {
        let t = RankingTable::from_scores(Method::Elo, vec![(id("x,y"), 1516.0), (id("z"), 1484.0)]);
        let back = RankingTable::from_csv(Method::Elo, &t.to_csv()).unwrap();
        assert_eq!(back, t);
        assert!(t.to_csv().starts_with("rank,agent,score\n"));
    }

    #[test]
    fn markdown_layout() {
        let t = RankingTable::from_scores(Method::Elo, vec![(id("a"), 1516.0)]);
        let md = t.to_markdown();
        assert!(md.starts_with("| Rank | Submission | Score |"));
        assert!(md.contains("| 1 | a | 1516.0 |"));
    }

    #[test]
    fn method_lists() {
        assert_eq!(Method::parse_list("elo,copeland").unwrap(), vec![Method::Elo, Method::Copeland]);
        assert_eq!(Method::parse_list("all").unwrap().len(), 5);
        assert!(Method::parse_list("borda").is_err());
    }

    #[test]
    fn validate_catches_bad_tables() {
        let mut t = RankingTable::from_scores(Method::Iml, vec![(id("a"), 2.0), (id("b"), 1.0)]);
        t.rows[1].rank = 3;
        assert!(t.validate().is_err());
        t.rows[1].rank = 2;
        t.rows[1].score = 5.0;
        assert!(t.validate().is_err());
    }
}
