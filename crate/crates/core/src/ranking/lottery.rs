use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};

use super::{MarginMatrix, Method, PairwiseMatrix, RankingError, RankingRow, RankingTable};

/// Tolerance on the lottery certificate.
pub const LOTTERY_EPS: f64 = 1e-6;
/// Probability above which an agent counts as in the lottery's support.
pub const SUPPORT_EPS: f64 = 1e-9;

/// `min_j xᵀ M e_j`: how badly the worst column does against `x`.
/// A maximal lottery has certificate ≥ 0.
pub fn certificate(margin: &MarginMatrix, x: &[f64]) -> f64 {
    let n = margin.len();
    (0..n)
        .map(|j| (0..n).map(|k| x[k] * margin.m[k][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Largest probability any optimal strategy can put on agent `target`,
/// together with that strategy.
fn max_weight(margin: &MarginMatrix, target: usize) -> Result<Vec<f64>, RankingError> {
    let n = margin.len();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..n)
        .map(|i| lp.add_var(if i == target { 1.0 } else { 0.0 }, (0.0, f64::INFINITY)))
        .collect();
    lp.add_constraint(vars.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for j in 0..n {
        let terms: Vec<_> = (0..n)
            .filter(|&k| margin.m[k][j] != 0.0)
            .map(|k| (vars[k], margin.m[k][j]))
            .collect();
        if !terms.is_empty() {
            lp.add_constraint(terms, ComparisonOp::Ge, 0.0);
        }
    }
    match lp.solve() {
        Ok(SolveOutcome::Solution(sol)) => Ok(vars.iter().map(|&v| sol.var_value(v)).collect()),
        Ok(SolveOutcome::Interrupted(_)) => Err(RankingError::Convergence("solver interrupted".into())),
        Err(e) => Err(RankingError::Convergence(e.to_string())),
    }
}

/// An optimal mixed strategy of the symmetric zero-sum game with payoff
/// matrix `margin`. When several exist, the returned one has the largest
/// possible support: it averages, over every agent that some optimal
/// strategy can play, the optimal strategy playing that agent most. With no
/// margins at all this is the uniform lottery.
pub fn maximal_lottery(margin: &MarginMatrix, eps: f64) -> Result<Vec<f64>, RankingError> {
    let n = margin.len();
    if n == 0 {
        return Err(RankingError::TooFewAgents { need: 1, got: 0 });
    }
    if !margin.is_antisymmetric() {
        return Err(RankingError::Malformed("margin matrix is not antisymmetric".into()));
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let mut sum = vec![0.0; n];
    let mut used = 0usize;
    for target in 0..n {
        let x = max_weight(margin, target)?;
        if x[target] > SUPPORT_EPS {
            for (s, v) in sum.iter_mut().zip(&x) {
                *s += v.max(0.0);
            }
            used += 1;
        }
    }
    if used == 0 {
        return Err(RankingError::Convergence("no optimal strategy found".into()));
    }
    let total: f64 = sum.iter().sum();
    let x: Vec<f64> = sum
        .iter()
        .map(|v| if v / total > SUPPORT_EPS { v / total } else { 0.0 })
        .collect();
    let total: f64 = x.iter().sum();
    let x: Vec<f64> = x.iter().map(|v| v / total).collect();
    let cert = certificate(margin, &x);
    if cert < -eps {
        return Err(RankingError::Convergence(format!("certificate {cert:e} below -{eps:e}")));
    }
    debug_assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-9 && x.iter().all(|v| *v >= 0.0));
    Ok(x)
}

/// Peel off the support of the maximal lottery as one rank tier, then
/// repeat on the remaining agents. Within a tier agents are ordered by
/// descending probability, then by name. With `N` agents, the agent at
/// position `p` (from 0) of a tier of size `t` starting at overall position
/// `s` (from 1) scores `N − (s − 1) − p / t`.
pub(crate) fn tiered(matrix: &PairwiseMatrix, method: Method) -> Result<RankingTable, RankingError> {
    let n = matrix.len();
    if n == 0 {
        return Err(RankingError::TooFewAgents { need: 1, got: 0 });
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut rows = Vec::with_capacity(n);
    let mut tier = 0;
    while !remaining.is_empty() {
        tier += 1;
        let x = maximal_lottery(&matrix.submatrix(&remaining).margins(), LOTTERY_EPS)?;
        let mut support: Vec<(usize, f64)> = remaining
            .iter()
            .zip(&x)
            .filter(|(_, p)| **p > SUPPORT_EPS)
            .map(|(i, p)| (*i, *p))
            .collect();
        support.sort_by(|(a, p), (b, q)| q.total_cmp(p).then_with(|| matrix.agents[*a].cmp(&matrix.agents[*b])));
        let start = rows.len() + 1;
        let size = support.len() as f64;
        for (pos, (i, _)) in support.iter().enumerate() {
            rows.push(RankingRow {
                rank: tier,
                agent: matrix.agents[*i].clone(),
                score: n as f64 - (start - 1) as f64 - pos as f64 / size,
            });
        }
        remaining.retain(|i| !support.iter().any(|(j, _)| j == i));
    }
    Ok(RankingTable { method, rows })
}

pub fn iterative_maximal_lotteries(matrix: &PairwiseMatrix) -> Result<RankingTable, RankingError> {
    tiered(matrix, Method::Iml)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::AgentId;

    fn mm(rows: &[&[f64]]) -> MarginMatrix {
        MarginMatrix {
            m: rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    fn agents(names: &[&str]) -> Vec<AgentId> {
        names.iter().map(|n| AgentId::new(*n).unwrap()).collect()
    }

    #[test]
    fn condorcet_row_is_degenerate() {
        let x = maximal_lottery(&mm(&[&[0.0, 2.0, 1.0], &[-2.0, 0.0, 3.0], &[-1.0, -3.0, 0.0]]), LOTTERY_EPS).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rock_paper_scissors_is_uniform() {
        let x = maximal_lottery(&mm(&[&[0.0, 1.0, -1.0], &[-1.0, 0.0, 1.0], &[1.0, -1.0, 0.0]]), LOTTERY_EPS).unwrap();
        for p in x {
            assert!((p - 1.0 / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn single_and_zero_matrices() {
        assert_eq!(maximal_lottery(&mm(&[&[0.0]]), LOTTERY_EPS).unwrap(), vec![1.0]);
        let x = maximal_lottery(&mm(&[&[0.0, 0.0], &[0.0, 0.0]]), LOTTERY_EPS).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-9 && (x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn refuses_non_antisymmetric() {
        assert!(maximal_lottery(&mm(&[&[0.0, 1.0], &[1.0, 0.0]]), LOTTERY_EPS).is_err());
    }

    #[test]
    fn iml_examples() {
        let chain = PairwiseMatrix::from_wins(agents(&["A", "B", "C"]), vec![vec![0, 1, 1], vec![0, 0, 1], vec![0, 0, 0]]);
        let t = iterative_maximal_lotteries(&chain).unwrap();
        let got: Vec<_> = t.rows.iter().map(|r| (r.rank, r.agent.as_str(), r.score)).collect();
        assert_eq!(got, vec![(1, "A", 3.0), (2, "B", 2.0), (3, "C", 1.0)]);

        let cycle = PairwiseMatrix::from_wins(agents(&["A", "B", "C"]), vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        let t = iterative_maximal_lotteries(&cycle).unwrap();
        assert!(t.rows.iter().all(|r| r.rank == 1));
        t.validate().unwrap();

        let one = PairwiseMatrix::new(agents(&["A"]));
        let t = iterative_maximal_lotteries(&one).unwrap();
        assert_eq!((t.rows[0].rank, t.rows[0].score), (1, 1.0));
    }
}
