//! Development and evaluation phases: every roster agent meets every
//! scenario of the phase alone against the scenario's background population.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;

use super::episode::{run_episode, Contestant, EpisodeResult, PolicyFactory, ScriptedFactory};
use super::seed::{derive_seed, COMPOSITION_SEAT};
use super::{CrossplayConfig, TournamentError};
use crate::domain::{compose_population, normalize_score, AgentId, Phase, Role, ScenarioSpec, ScoreRecord};

#[derive(Clone)]
pub struct RosterEntry {
    pub id: AgentId,
    pub factory: Arc<dyn PolicyFactory>,
}

impl RosterEntry {
    pub fn new(id: AgentId, factory: Arc<dyn PolicyFactory>) -> RosterEntry {
        RosterEntry { id, factory }
    }

    pub fn contestant(&self) -> Contestant {
        Contestant::new(self.id.clone(), self.factory.clone())
    }
}

impl std::fmt::Debug for RosterEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RosterEntry").field("id", &self.id).finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub master_seed: u64,
    pub runs_per_scenario: u32,
    pub roster: Vec<RosterEntry>,
    pub scenarios: Vec<ScenarioSpec>,
    pub crossplay: Option<CrossplayConfig>,
}

impl Manifest {
    pub fn scenarios_for(&self, phase: Phase) -> Vec<ScenarioSpec> {
        self.scenarios.iter().filter(|s| s.phase == phase).cloned().collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseOutput {
    /// Sorted by scenario, run, agent, role.
    pub records: Vec<ScoreRecord>,
    /// Sorted by scenario, run, first focal agent.
    pub episodes: Vec<EpisodeResult>,
}

/// Duplicate scenario ids, one entry per repeated id.
pub fn duplicate_scenario_ids(scenarios: &[ScenarioSpec]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut dups = BTreeSet::new();
    for s in scenarios {
        if !seen.insert(s.scenario_id.as_str()) {
            dups.insert(s.scenario_id.clone());
        }
    }
    dups.into_iter().collect()
}

/// Evaluation scenarios must be unseen: none may repeat the content of a
/// development scenario under a new id.
pub fn check_veil(scenarios: &[ScenarioSpec]) -> Result<(), TournamentError> {
    let dev: BTreeMap<String, &str> = scenarios
        .iter()
        .filter(|s| s.phase == Phase::Development)
        .map(|s| (s.fingerprint(), s.scenario_id.as_str()))
        .collect();
    for s in scenarios.iter().filter(|s| s.phase == Phase::Evaluation) {
        if let Some(dev_id) = dev.get(&s.fingerprint()) {
            return Err(TournamentError::Veil(format!(
                "veil overlap: evaluation scenario '{}' duplicates development scenario '{dev_id}'",
                s.scenario_id
            )));
        }
    }
    Ok(())
}

pub(crate) fn background_agent(strategy: &str, tag: &str) -> AgentId {
    AgentId::new(format!("{strategy}@{tag}")).expect("non-empty")
}

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool, TournamentError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| TournamentError::ThreadPool(e.to_string()))
}

pub(crate) fn sort_records(records: &mut [ScoreRecord]) {
    records.sort_by(|a, b| {
        (&a.scenario_id, a.run_index, &a.agent, a.role).cmp(&(&b.scenario_id, b.run_index, &b.agent, b.role))
    });
}

/// Run the given scenarios for every roster agent. Every scenario must be
/// tagged with `phase`; a mismatch is refused before anything runs.
pub fn run_scenarios(
    roster: &[RosterEntry],
    scenarios: &[ScenarioSpec],
    phase: Phase,
    runs: u32,
    master_seed: u64,
    workers: usize,
) -> Result<PhaseOutput, TournamentError> {
    if let Some(bad) = scenarios.iter().find(|s| s.phase != phase) {
        return Err(TournamentError::Veil(format!(
            "scenario '{}' belongs to the {} phase and cannot run in the {phase} phase",
            bad.scenario_id, bad.phase
        )));
    }
    if let Some(dup) = duplicate_scenario_ids(scenarios).first() {
        return Err(TournamentError::DuplicateScenario(dup.clone()));
    }
    let mut tasks = Vec::new();
    for si in 0..scenarios.len() {
        for run in 0..runs {
            for ai in 0..roster.len() {
                tasks.push((si, run, ai));
            }
        }
    }
    let run_task = |&(si, run, ai): &(usize, u32, usize)| -> Result<(Vec<ScoreRecord>, EpisodeResult), TournamentError> {
        let spec = &scenarios[si];
        let entry = &roster[ai];
        let strategy = spec.background_strategy()?;
        let background = Contestant::new(
            background_agent(strategy.name(), entry.id.as_str()),
            Arc::new(ScriptedFactory(strategy)),
        );
        let comp_seed = derive_seed(master_seed, &spec.scenario_id, run, COMPOSITION_SEAT);
        let seats = compose_population(spec, &entry.contestant(), &background, comp_seed)?;
        let episode = run_episode(spec, &seats, run, master_seed)?;
        let (lo, hi) = spec.bounds()?;
        let focal_raw = episode.role_raw(Role::Focal).unwrap_or(0.0);
        let mut records = vec![ScoreRecord {
            agent: entry.id.clone(),
            scenario_id: spec.scenario_id.clone(),
            run_index: run,
            role: Role::Focal,
            raw: focal_raw,
            normalized: Some(normalize_score(focal_raw, lo, hi)?),
        }];
        if let Some(bg_raw) = episode.role_raw(Role::Background) {
            records.push(ScoreRecord {
                agent: background.agent.clone(),
                scenario_id: spec.scenario_id.clone(),
                run_index: run,
                role: Role::Background,
                raw: bg_raw,
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
    // tasks were generated in (scenario index, run, agent) order; re-sort by id
    out.episodes.sort_by(|a, b| {
        let key = |e: &EpisodeResult| {
            let focal = e.seats.iter().find(|s| s.role == Role::Focal).map(|s| s.agent.clone());
            (e.scenario_id.clone(), e.run_index, focal)
        };
        key(a).cmp(&key(b))
    });
    Ok(out)
}

/// Run one phase of a manifest. The evaluation phase also checks that no
/// evaluation scenario repeats a development scenario.
pub fn run_phase(manifest: &Manifest, phase: Phase, workers: usize) -> Result<PhaseOutput, TournamentError> {
    if phase == Phase::Evaluation {
        check_veil(&manifest.scenarios)?;
    }
    if let Some(dup) = duplicate_scenario_ids(&manifest.scenarios).first() {
        return Err(TournamentError::DuplicateScenario(dup.clone()));
    }
    let scenarios = manifest.scenarios_for(phase);
    if scenarios.is_empty() {
        return Err(TournamentError::NoScenarios(phase));
    }
    if manifest.roster.is_empty() {
        return Ok(PhaseOutput::default());
    }
    run_scenarios(
        &manifest.roster,
        &scenarios,
        phase,
        manifest.runs_per_scenario,
        manifest.master_seed,
        workers,
    )
}
