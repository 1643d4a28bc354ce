use std::cmp::Ordering;

use super::{Method, PairwiseMatrix, RankingError, RankingTable};

fn require_two(matrix: &PairwiseMatrix) -> Result<(), RankingError> {
    if matrix.len() < 2 {
        return Err(RankingError::TooFewAgents {
            need: 2,
            got: matrix.len(),
        });
    }
    Ok(())
}

/// Duel wins plus half a point per drawn duel. A duel is decided by the
/// majority of all comparisons between the two agents; a pair never
/// compared is a drawn duel.
pub fn copeland_scores(matrix: &PairwiseMatrix) -> Vec<f64> {
    let n = matrix.len();
    let mut scores = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            match matrix.wins[i][j].cmp(&matrix.wins[j][i]) {
                Ordering::Greater => scores[i] += 1.0,
                Ordering::Less => scores[j] += 1.0,
                Ordering::Equal => {
                    scores[i] += 0.5;
                    scores[j] += 0.5;
                }
            }
        }
    }
    scores
}

pub fn copeland(matrix: &PairwiseMatrix) -> Result<RankingTable, RankingError> {
    require_two(matrix)?;
    let scores = copeland_scores(matrix);
    Ok(RankingTable::from_scores(
        Method::Copeland,
        matrix.agents.iter().cloned().zip(scores).collect(),
    ))
}

fn reaches(adj: &[Vec<bool>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        stack.extend((0..adj.len()).filter(|&w| adj[v][w] && !seen[w]));
    }
    false
}

/// The ranked-pairs lock: majority edges sorted by margin (largest first,
/// then by winner and loser name), each locked unless it would close a
/// cycle. Returns the locked adjacency matrix.
pub fn locked_edges(matrix: &PairwiseMatrix) -> Vec<Vec<bool>> {
    let n = matrix.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if matrix.wins[i][j] > matrix.wins[j][i] {
                edges.push((matrix.wins[i][j] - matrix.wins[j][i], i, j));
            }
        }
    }
    edges.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then_with(|| matrix.agents[a.1].cmp(&matrix.agents[b.1]))
            .then_with(|| matrix.agents[a.2].cmp(&matrix.agents[b.2]))
    });
    let mut adj = vec![vec![false; n]; n];
    for (_, w, l) in edges {
        if !reaches(&adj, l, w) {
            adj[w][l] = true;
        }
    }
    adj
}

/// Ranked pairs (Tideman). An agent's score is the number of agents it
/// is locked above, directly or through a chain of locked edges; sorting
/// by that count respects every locked edge. Agents the lock leaves
/// incomparable may share a score and then a rank.
pub fn ranked_pairs(matrix: &PairwiseMatrix) -> Result<RankingTable, RankingError> {
    require_two(matrix)?;
    let adj = locked_edges(matrix);
    let n = matrix.len();
    let scores = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && reaches(&adj, i, j)).count() as f64)
        .collect::<Vec<_>>();
    Ok(RankingTable::from_scores(
        Method::RankedPairs,
        matrix.agents.iter().cloned().zip(scores).collect(),
    ))
}
