//! Cross-play: finalists share episodes. For each scenario every
//! `s`-subset of the finalists (with `s` the smaller of the finalist count
//! and the seat count) plays once per run; seat order rotates with the run
//! so positions are balanced, and leftover seats go to the background.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, Contestant, EpisodeResult, ScriptedFactory};
use super::phase::{background_agent, pool, sort_records, PhaseOutput, RosterEntry};
use super::TournamentError;
use crate::domain::{normalize_score, AgentId, Role, ScenarioSpec, ScoreRecord, Seat, SeatAssignment};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossplayConfig {
    pub finalists: Vec<AgentId>,
    pub scenarios: Vec<ScenarioSpec>,
    pub runs: u32,
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// The seating for one scenario: per (run, combination) the finalist
/// indices in seat order.
pub fn seating_schedule(finalists: usize, seats: usize, runs: u32) -> Vec<(u32, usize, Vec<usize>)> {
    let s = finalists.min(seats);
    let combos = combinations(finalists, s);
    let mut out = Vec::new();
    for run in 0..runs {
        for (ci, combo) in combos.iter().enumerate() {
            let mut order = combo.clone();
            if !order.is_empty() {
                let shift = run as usize % order.len();
                order.rotate_left(shift);
            }
            out.push((run, ci, order));
        }
    }
    out
}

pub fn run_crossplay(
    config: &CrossplayConfig,
    roster: &[RosterEntry],
    master_seed: u64,
    workers: usize,
) -> Result<PhaseOutput, TournamentError> {
    let f = config.finalists.len();
    if f < 2 {
        return Err(TournamentError::TooFewFinalists(f));
    }
    let finalists: Vec<RosterEntry> = config
        .finalists
        .iter()
        .map(|id| {
            roster
                .iter()
                .find(|e| &e.id == id)
                .cloned()
                .ok_or_else(|| TournamentError::UnknownAgent(id.to_string()))
        })
        .collect::<Result<_, _>>()?;

    let mut tasks = Vec::new();
    for (si, spec) in config.scenarios.iter().enumerate() {
        let n = spec.population_size() as usize;
        if n < 2 {
            return Err(TournamentError::Infeasible(format!(
                "scenario '{}' has {n} seats, cross-play needs at least 2",
                spec.scenario_id
            )));
        }
        let combos = combinations(f, f.min(n)).len() as u32;
        for (run, ci, order) in seating_schedule(f, n, config.runs) {
            tasks.push((si, run * combos + ci as u32, order));
        }
    }

    let run_task = |(si, run_index, order): &(usize, u32, Vec<usize>)| -> Result<(Vec<ScoreRecord>, EpisodeResult), TournamentError> {
        let spec = &config.scenarios[*si];
        let n = spec.population_size() as usize;
        let strategy = spec.background_strategy()?;
        let background = Contestant::new(
            background_agent(strategy.name(), "crossplay"),
            Arc::new(ScriptedFactory(strategy)),
        );
        let seats = (0..n)
            .map(|index| match order.get(index) {
                Some(&fi) => Seat {
                    index,
                    policy: finalists[fi].contestant(),
                    role: Role::Focal,
                },
                None => Seat {
                    index,
                    policy: background.clone(),
                    role: Role::Background,
                },
            })
            .collect();
        let episode = run_episode(spec, &SeatAssignment { seats }, *run_index, master_seed)?;
        let (lo, hi) = spec.bounds()?;
        let mut records = Vec::new();
        for &fi in order {
            let agent = &finalists[fi].id;
            let raw = episode.mean_raw(agent).unwrap_or(0.0);
            records.push(ScoreRecord {
                agent: agent.clone(),
                scenario_id: spec.scenario_id.clone(),
                run_index: *run_index,
                role: Role::Focal,
                raw,
                normalized: Some(normalize_score(raw, lo, hi)?),
            });
        }
        if let Some(raw) = episode.role_raw(Role::Background) {
            records.push(ScoreRecord {
                agent: background.agent.clone(),
                scenario_id: spec.scenario_id.clone(),
                run_index: *run_index,
                role: Role::Background,
                raw,
                normalized: None,
            });
        }
        Ok((records, episode))
    };

    let results: Vec<_> = pool(workers)?.install(|| tasks.par_iter().map(run_task).collect());
    let mut out = PhaseOutput::default();
    for r in results {
        let (records, episode) = r?;
        out.records.extend(records);
        out.episodes.push(episode);
    }
    sort_records(&mut out.records);
    out.episodes
        .sort_by(|a, b| (&a.scenario_id, a.run_index).cmp(&(&b.scenario_id, b.run_index)));
    Ok(out)
}
