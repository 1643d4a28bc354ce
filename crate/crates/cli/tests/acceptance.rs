//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use arena_cli::{write_records, EndpointOverrides, ManifestFile};
use arena_core::domain::{
    normalize_score, AgentId, EventKind, Mode, Phase, Role, ScenarioSpec, ScoreRecord, Seat, SeatAssignment,
};
use arena_core::populations::BackgroundStrategyId as S;
use arena_core::ranking::{
    copeland, elo_ratings, iterative_maximal_lotteries, matches, maximal_lottery, rank, ranked_pairs, EloConfig,
    MarginMatrix, Method, PairwiseMatrix, RankingTable, DEFAULT_EPSILON, LOTTERY_EPS,
};
use arena_core::substrates::{GameKind, SubstrateId, SubstrateParams};
use arena_core::tournament::{run_episode, run_phase, run_scenarios, Contestant, Manifest, PhaseOutput, RosterEntry};
use arena_llm::{
    http_connector, ChatClient, ChatMessage, ChatRequest, EndpointConfig, HttpChatClient, LlmFactory, MockReply,
    MockServer, ScaffoldConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn agents(n: usize) -> Vec<AgentId> {
    (0..n).map(|i| AgentId::new(format!("a{i}")).unwrap()).collect()
}

/// Random duel counts: each pair is a row win, a column win, a tie or
/// never compared.
fn random_duels(rng: &mut ChaCha8Rng, n: usize) -> PairwiseMatrix {
    let mut wins = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let m = rng.gen_range(1..4);
            match rng.gen_range(0..4) {
                0 => wins[i][j] = m,
                1 => wins[j][i] = m,
                2 => {
                    wins[i][j] = m;
                    wins[j][i] = m;
                }
                _ => {}
            }
        }
    }
    PairwiseMatrix::from_wins(agents(n), wins)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Ranked pairs by exhaustion over linear orders: the orders that agree
/// with the priority-sorted majorities lexicographically best; an agent
/// scores one for every agent it precedes in all of them.
fn oracle_ranked_pairs(m: &PairwiseMatrix) -> Vec<f64> {
    let n = m.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if m.wins[i][j] > m.wins[j][i] {
                edges.push((m.wins[i][j] - m.wins[j][i], i, j));
            }
        }
    }
    edges.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(m.agents[a.1].cmp(&m.agents[b.1]))
            .then(m.agents[a.2].cmp(&m.agents[b.2]))
    });
    let perms = permutations(n);
    let position = |p: &Vec<usize>, a: usize| p.iter().position(|x| *x == a).unwrap();
    let agreement = |p: &Vec<usize>| -> Vec<bool> { edges.iter().map(|&(_, w, l)| position(p, w) < position(p, l)).collect() };
    let best = perms.iter().map(agreement).max().unwrap();
    let winners: Vec<&Vec<usize>> = perms.iter().filter(|p| agreement(p) == best).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && winners.iter().all(|p| position(p, i) < position(p, j)))
                .count() as f64
        })
        .collect()
}

/// One point per duel won by majority, half for a drawn or missing duel.
fn oracle_copeland(m: &PairwiseMatrix) -> Vec<f64> {
    let n = m.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| match m.wins[i][j].cmp(&m.wins[j][i]) {
                    std::cmp::Ordering::Greater => 1.0,
                    std::cmp::Ordering::Equal => 0.5,
                    std::cmp::Ordering::Less => 0.0,
                })
                .sum()
        })
        .collect()
}

fn table_matches(t: &RankingTable, m: &PairwiseMatrix, expected: &[f64]) -> bool {
    m.agents.iter().zip(expected).all(|(a, e)| t.score_of(a) == Some(*e)) && t.validate().is_ok()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..10_000 {
        let n = rng.gen_range(2..=5);
        let m = random_duels(&mut rng, n);
        let rp = ranked_pairs(&m).map_err(|e| e.to_string())?;
        check(table_matches(&rp, &m, &oracle_ranked_pairs(&m)), format!("ranked pairs differs on case {case}: {:?}", m.wins))?;
        let cp = copeland(&m).map_err(|e| e.to_string())?;
        check(table_matches(&cp, &m, &oracle_copeland(&m)), format!("copeland differs on case {case}: {:?}", m.wins))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!("10000 matrices agree with both oracles in {:.1}s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::INFINITY;
    for case in 0..500 {
        let n = rng.gen_range(1..=8);
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.gen_range(-6i32..=6) as f64;
                m[i][j] = v;
                m[j][i] = -v;
            }
        }
        let margin = MarginMatrix { m: m.clone() };
        let x = maximal_lottery(&margin, LOTTERY_EPS).map_err(|e| format!("case {case}: {e}"))?;
        let sum: f64 = x.iter().sum();
        check((sum - 1.0).abs() < 1e-9, format!("case {case}: sum {sum}"))?;
        check(x.iter().all(|&p| p >= -1e-12), format!("case {case}: negative weight {x:?}"))?;
        let cert = (0..n)
            .map(|j| (0..n).map(|k| x[k] * m[k][j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        check(cert >= -1e-6, format!("case {case}: certificate {cert}"))?;
        worst = worst.min(cert);
    }
    let rps = MarginMatrix {
        m: vec![vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]],
    };
    let x = maximal_lottery(&rps, LOTTERY_EPS).map_err(|e| e.to_string())?;
    check(x.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-6), format!("rock-paper-scissors gave {x:?}"))?;
    Ok(format!("500 lotteries certified (worst {worst:.2e}); rock-paper-scissors uniform"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut hits = 0;
    for case in 0..100 {
        let n = rng.gen_range(2..=8);
        let w = rng.gen_range(0..n);
        let mut wins = vec![vec![0u64; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                wins[i][j] = rng.gen_range(0..5);
                wins[j][i] = rng.gen_range(0..5);
            }
        }
        for j in (0..n).filter(|&j| j != w) {
            wins[w][j] = wins[j][w] + rng.gen_range(1..4);
        }
        let m = PairwiseMatrix::from_wins(agents(n), wins);
        let winner = &m.agents[w];
        let tables = [
            copeland(&m).map_err(|e| e.to_string())?,
            ranked_pairs(&m).map_err(|e| e.to_string())?,
            iterative_maximal_lotteries(&m).map_err(|e| e.to_string())?,
        ];
        let first = |t: &RankingTable| t.rank_of(winner) == Some(1) && t.rows.iter().filter(|r| r.rank == 1).count() == 1;
        if tables.iter().all(first) {
            hits += 1;
        } else {
            return Err(format!("case {case}: planted winner {winner} not alone at rank 1"));
        }
    }
    Ok(format!("{hits}/100 planted winners ranked first by Copeland, Ranked Pairs and IML"))
}

fn uniform(spec: &ScenarioSpec, s: S) -> SeatAssignment<Contestant> {
    let c = Contestant::scripted(AgentId::new(s.name()).unwrap(), s);
    SeatAssignment {
        seats: (0..spec.population_size() as usize)
            .map(|index| Seat {
                index,
                policy: c.clone(),
                role: Role::Focal,
            })
            .collect(),
    }
}

fn criterion_4() -> Outcome {
    let mut passed = Vec::new();
    for sub in SubstrateId::ALL {
        let spec = ScenarioSpec::new(sub.name(), sub, Mode::Resident, S::NaiveAltruist, Phase::Development);
        let total = |s: S| -> Result<f64, String> {
            let ep = run_episode(&spec, &uniform(&spec, s), 0, 4).map_err(|e| e.to_string())?;
            Ok(ep.seats.iter().map(|s| s.raw).sum())
        };
        let (coop, defect) = (total(S::NaiveAltruist)?, total(S::Defector)?);
        check(coop > defect, format!("{}: cooperative {coop} vs non-cooperative {defect}", sub.name()))?;
        passed.push(sub.name());
    }
    Ok(format!("{}/5 substrates: {}", passed.len(), passed.join(", ")))
}

fn desk_manifest() -> Result<ManifestFile, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../manifests/desk.toml");
    let file = ManifestFile::load(&path).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = file.roster.iter().map(|a| a.id.as_str()).collect();
    check(
        ids == ["conditional_cooperator", "naive_altruist", "defector", "rational_baseline", "random"],
        format!("unexpected roster {ids:?}"),
    )?;
    check(file.runs == 10, "desk manifest must play 10 runs")?;
    let dev: Vec<&ScenarioSpec> = file.scenarios.iter().filter(|s| s.phase == Phase::Development).collect();
    for sub in SubstrateId::ALL {
        for mode in [Mode::Resident, Mode::Visitor] {
            check(
                dev.iter().any(|s| s.substrate().ok() == Some(sub) && s.mode == mode && s.background_strategy_id == "grim_trigger"),
                format!("no {} {mode} scenario against grim triggers", sub.name()),
            )?;
        }
    }
    Ok(file)
}

fn desk(workers: usize, extra: Option<RosterEntry>) -> Result<(Manifest, PhaseOutput), String> {
    let mut manifest = desk_manifest()?.resolve(&EndpointOverrides::default()).map_err(|e| e.to_string())?;
    manifest.roster.extend(extra);
    let out = run_phase(&manifest, Phase::Development, workers).map_err(|e| e.to_string())?;
    Ok((manifest, out))
}

fn elo_of(records: &[ScoreRecord]) -> Result<arena_core::ranking::EloRatings, String> {
    elo_ratings(&matches(records, DEFAULT_EPSILON), EloConfig::default()).map_err(|e| e.to_string())
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let (manifest, out) = desk(1, None)?;
    let elapsed = start.elapsed();
    let elo = elo_of(&out.records)?;
    let get = |id: &str| elo.ratings[&AgentId::new(id).unwrap()];
    let (cc, d) = (get("conditional_cooperator"), get("defector"));
    check(cc > d, format!("Elo conditional_cooperator {cc:.1} vs defector {d:.1}"))?;
    check(elapsed < Duration::from_secs(300), format!("single-threaded run took {elapsed:?}"))?;

    // the same visitor scenario restricted to the prisoner's dilemma
    let pd = ScenarioSpec::new("pd-only-visitor", SubstrateId::RealityShow, Mode::Visitor, S::GrimTrigger, Phase::Development)
        .with_horizon(10)
        .with_params(SubstrateParams {
            games: Some(vec![GameKind::Pd]),
            ..Default::default()
        });
    let opponents = (pd.population_size() - 1) as f64;
    let sub = run_scenarios(&manifest.roster, &[pd], Phase::Development, 10, manifest.master_seed, 1).map_err(|e| e.to_string())?;
    for (agent, per_opponent) in [("conditional_cooperator", 30.0), ("defector", 14.0)] {
        for r in sub.records.iter().filter(|r| r.agent.as_str() == agent) {
            check(
                r.raw == per_opponent * opponents,
                format!("{agent} scored {} in run {}, expected {per_opponent} per opponent", r.raw, r.run_index),
            )?;
        }
    }
    Ok(format!(
        "Elo conditional_cooperator {cc:.1} > defector {d:.1}; prisoner's dilemma 30 vs 14 per opponent; {} records in {:.2}s",
        out.records.len(),
        elapsed.as_secs_f64()
    ))
}

fn all_tables(records: &[ScoreRecord]) -> Result<Vec<String>, String> {
    Method::ALL
        .iter()
        .map(|&m| rank(records, m, DEFAULT_EPSILON).map(|t| t.to_csv()).map_err(|e| e.to_string()))
        .collect()
}

fn criterion_6() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    let mut tables = Vec::new();
    for workers in [1, 8] {
        let (_, out) = desk(workers, None)?;
        let path = dir.path().join(format!("results-{workers}.jsonl"));
        write_records(&path, &out.records).map_err(|e| e.to_string())?;
        bytes.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        tables.push(all_tables(&out.records)?);
    }
    check(bytes[0] == bytes[1], "results.jsonl differs between 1 and 8 workers")?;
    check(tables[0] == tables[1], "ranking tables differ between 1 and 8 workers")?;
    Ok(format!("{} bytes of results and 5 tables identical for 1 and 8 workers", bytes[0].len()))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let special = [f64::NEG_INFINITY, f64::INFINITY, f64::MIN, f64::MAX, 0.0, -0.0];
    for case in 0..100_000 {
        let a: f64 = rng.gen_range(-1e6..1e6);
        let b: f64 = a + rng.gen_range(1e-6..1e6);
        let draw = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.05) {
                special[rng.gen_range(0..special.len())]
            } else {
                rng.gen_range(a - (b - a)..b + (b - a))
            }
        };
        let (x, y) = (draw(&mut rng), draw(&mut rng));
        let nx = normalize_score(x, a, b).map_err(|e| format!("case {case}: {e}"))?;
        let ny = normalize_score(y, a, b).map_err(|e| format!("case {case}: {e}"))?;
        check((0.0..=1.0).contains(&nx) && (0.0..=1.0).contains(&ny), format!("case {case}: out of range"))?;
        check(x > y || nx <= ny, format!("case {case}: not monotone at {x}, {y} in [{a}, {b}]"))?;
        check(normalize_score(f64::NEG_INFINITY, a, b) == Ok(0.0), format!("case {case}: -inf not mapped to 0"))?;
    }
    Ok("100000 triples in [0, 1], monotone, -inf maps to 0".into())
}

fn criterion_8() -> Outcome {
    let (_, out) = desk(1, None)?;
    let elo = elo_of(&out.records)?;
    let target = elo.ratings.len() as f64 * 1500.0;
    let worst = elo.sums.iter().map(|s| (s - target).abs()).fold(0.0, f64::max);
    check(worst <= 1e-9, format!("rating sum drifted by {worst:e}"))?;
    Ok(format!("{} updates, sum within {worst:.1e} of {target}", elo.sums.len()))
}

fn criterion_9() -> Outcome {
    let echo = MockServer::content("C").map_err(|e| e.to_string())?;
    let mut client = HttpChatClient::new(EndpointConfig::new(echo.base_url(), "mock")).map_err(|e| e.to_string())?;
    let reply = client
        .chat(&ChatRequest {
            model: "mock".into(),
            messages: vec![ChatMessage::user("C or D?")],
            temperature: 0.0,
        })
        .map_err(|e| e.to_string())?;
    check(reply.content == "C", format!("round trip returned {:?}", reply.content))?;

    let failing = MockServer::start(vec![MockReply::Status(500)]).map_err(|e| e.to_string())?;
    let config = ScaffoldConfig::default();
    let budget = config.max_llm_calls_per_step;
    let mut endpoint = EndpointConfig::new(failing.base_url(), "mock");
    endpoint.timeout = Duration::from_secs(10);
    let entry = RosterEntry::new(
        AgentId::new("failing_model").unwrap(),
        Arc::new(LlmFactory::new(config, "mock", Arc::new(http_connector(endpoint)))),
    );
    let (manifest, out) = desk(8, Some(entry))?;
    let focal: Vec<&ScoreRecord> = out.records.iter().filter(|r| r.role == Role::Focal).collect();
    let expected = manifest.roster.len() * manifest.scenarios_for(Phase::Development).len() * 10;
    check(focal.len() == expected, format!("{} focal records, expected {expected}", focal.len()))?;
    check(
        focal.iter().all(|r| r.normalized.is_some_and(|n| (0.0..=1.0).contains(&n))),
        "a focal score is missing or outside [0, 1]",
    )?;
    let mut steps = 0u64;
    let mut calls = 0u64;
    let mut episodes = 0;
    for ep in &out.episodes {
        let seats: Vec<usize> = ep.seats.iter().filter(|s| s.agent.as_str() == "failing_model").map(|s| s.seat).collect();
        if seats.is_empty() {
            continue;
        }
        episodes += 1;
        for e in ep.trajectory.iter().filter(|e| e.speaker.is_some_and(|s| seats.contains(&s))) {
            if let EventKind::Usage { calls: c, .. } = e.kind {
                check(c <= budget, format!("{c} calls in one step, budget {budget}"))?;
                steps += 1;
                calls += c as u64;
            }
            check(!matches!(e.kind, EventKind::PolicyFault { .. }), "the model seat was retired")?;
        }
    }
    check(steps > 0, "the model seat never acted")?;
    check(failing.served() as u64 == calls, format!("server saw {} requests, log says {calls}", failing.served()))?;
    Ok(format!(
        "round trip ok; failing seats finished {episodes} episodes, {steps} steps, {calls} calls (budget {budget} per step)"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("voting-rule oracles", criterion_1),
        ("maximal-lottery certificate", criterion_2),
        ("Condorcet consistency", criterion_3),
        ("cooperation-eliciting substrates", criterion_4),
        ("desk tournament separation", criterion_5),
        ("determinism across workers", criterion_6),
        ("normalization fuzz", criterion_7),
        ("Elo conservation", criterion_8),
        ("model adapter resilience", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
