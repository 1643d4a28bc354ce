use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arena_cli::read_records;
use arena_core::domain::ScoreRecord;
use tempfile::TempDir;

fn arena(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arena"))
        .args(args)
        .env_remove("ARENA_LLM_BASE_URL")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = r#"
seed = 7
runs = 3

[[roster]]
id = "cc"
strategy = "conditional_cooperator"

[[roster]]
id = "defector"
strategy = "defector"

[[roster]]
id = "altruist"
strategy = "naive_altruist"

[[scenarios]]
scenario_id = "pd-visitor"
substrate_id = "reality_show"
mode = "visitor"
background_strategy_id = "grim_trigger"
phase = "dev"
tags = ["discouraging_antisocial_behavior"]

[[scenarios]]
scenario_id = "labor-resident"
substrate_id = "labor_collective_action"
mode = "resident"
background_strategy_id = "grim_trigger"
phase = "dev"
tags = ["coordination", "persuasion"]

[[scenarios]]
scenario_id = "pd-eval"
substrate_id = "reality_show"
mode = "visitor"
background_strategy_id = "defector"
phase = "eval"

[crossplay]
finalists = ["cc", "defector"]
scenarios = ["pd-visitor"]
runs = 2
"#;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new(manifest: &str) -> Fixture {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("m.toml"), manifest).unwrap();
        Fixture { dir }
    }

    fn manifest(&self) -> String {
        self.path("m.toml")
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, out: &str, extra: &[&str]) -> Output {
        let m = self.manifest();
        let o = self.path(out);
        let mut args = vec!["run", "--manifest", m.as_str(), "--out", o.as_str()];
        args.extend_from_slice(extra);
        arena(&args)
    }
}

fn records(path: &Path) -> Vec<ScoreRecord> {
    read_records(&path.join("results.jsonl")).unwrap()
}

#[test]
fn dev_run_writes_one_focal_line_per_agent_scenario_run() {
    let f = Fixture::new(SMALL);
    let out = f.run("o", &["--workers", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let recs = records(&f.out("o"));
    let focal = recs.iter().filter(|r| r.role == arena_core::domain::Role::Focal).count();
    assert_eq!(focal, 3 * 2 * 3);
    let traj = fs::read_to_string(f.out("o").join("trajectories.jsonl")).unwrap();
    assert_eq!(traj.lines().count(), 3 * 2 * 3);
}

#[test]
fn runs_and_seed_flags_override_the_manifest() {
    let f = Fixture::new(SMALL);
    assert_eq!(code(&f.run("a", &["--runs", "1", "--seed", "9"])), 0);
    let recs = records(&f.out("a"));
    assert!(recs.iter().all(|r| r.run_index == 0));
    assert_eq!(code(&f.run("b", &["--runs", "1", "--seed", "10"])), 0);
    assert_ne!(
        fs::read(f.out("a").join("trajectories.jsonl")).unwrap(),
        fs::read(f.out("b").join("trajectories.jsonl")).unwrap()
    );
}

#[test]
fn worker_count_does_not_change_output() {
    let f = Fixture::new(SMALL);
    assert_eq!(code(&f.run("w1", &["--workers", "1"])), 0);
    assert_eq!(code(&f.run("w4", &["--workers", "4"])), 0);
    for file in ["results.jsonl", "trajectories.jsonl"] {
        assert_eq!(
            fs::read(f.out("w1").join(file)).unwrap(),
            fs::read(f.out("w4").join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn rerun_overwrites_with_identical_bytes() {
    let f = Fixture::new(SMALL);
    assert_eq!(code(&f.run("o", &[])), 0);
    let first = fs::read(f.out("o").join("results.jsonl")).unwrap();
    assert_eq!(code(&f.run("o", &[])), 0);
    assert_eq!(first, fs::read(f.out("o").join("results.jsonl")).unwrap());
}

#[test]
fn eval_and_crossplay_phases() {
    let f = Fixture::new(SMALL);
    assert_eq!(code(&f.run("e", &["--phase", "eval"])), 0);
    assert!(records(&f.out("e")).iter().all(|r| r.scenario_id == "pd-eval"));
    let out = f.run("x", &["--phase", "crossplay"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let recs = records(&f.out("x"));
    // two finalists, one two-seat subset, two runs
    assert_eq!(recs.iter().filter(|r| r.agent.as_str() == "cc").count(), 2);
    assert_eq!(recs.iter().filter(|r| r.agent.as_str() == "defector").count(), 2);
}

#[test]
fn missing_manifest_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("nope.toml");
    let out = arena(&["run", "--manifest", m.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nope.toml"));
}

#[test]
fn unparseable_manifest_is_a_usage_error() {
    let f = Fixture::new("seed = \"not a number\"");
    assert_eq!(code(&f.run("o", &[])), 2);
    let f = Fixture::new("surprise = 1");
    assert_eq!(code(&f.run("o", &[])), 2);
}

#[test]
fn bad_flags_are_usage_errors() {
    let f = Fixture::new(SMALL);
    assert_eq!(code(&f.run("o", &["--phase", "final"])), 2);
    assert_eq!(code(&f.run("o", &["--workers", "0"])), 2);
    assert_eq!(code(&arena(&["frobnicate"])), 2);
}

#[test]
fn rank_writes_one_table_pair_per_method() {
    let f = Fixture::new(SMALL);
    assert_eq!(code(&f.run("o", &[])), 0);
    let o = f.path("o");
    let out = arena(&["rank", "--out", &o, "--method", "elo,copeland"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut names: Vec<String> = fs::read_dir(f.out("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("ranking_"))
        .collect();
    names.sort();
    assert_eq!(names, ["ranking_copeland.csv", "ranking_copeland.md", "ranking_elo.csv", "ranking_elo.md"]);
    let md = fs::read_to_string(f.out("o").join("ranking_elo.md")).unwrap();
    assert!(md.starts_with("| Rank | Submission | Score |"));
}

#[test]
fn rank_all_gives_five_tables() {
    let f = Fixture::new(SMALL);
    assert_eq!(code(&f.run("o", &[])), 0);
    let o = f.path("o");
    assert_eq!(code(&arena(&["rank", "--out", &o, "--method", "all"])), 0);
    let csvs = fs::read_dir(f.out("o"))
        .unwrap()
        .filter(|e| {
            let n = e.as_ref().unwrap().file_name().to_string_lossy().into_owned();
            n.starts_with("ranking_") && n.ends_with(".csv")
        })
        .count();
    assert_eq!(csvs, 5);
}

#[test]
fn rank_rejects_unknown_methods_and_empty_results() {
    let f = Fixture::new(SMALL);
    fs::write(f.out("empty.jsonl"), "").unwrap();
    let empty = f.path("empty.jsonl");
    let o = f.path("r");
    let out = arena(&["rank", "--results", &empty, "--out", &o]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no comparisons"), "{}", stderr(&out));
    let out = arena(&["rank", "--results", &empty, "--out", &o, "--method", "borda"]);
    assert_eq!(code(&out), 2);
    let missing = f.path("missing.jsonl");
    assert_eq!(code(&arena(&["rank", "--results", &missing, "--out", &o])), 2);
}

#[test]
fn report_has_every_section_and_is_stable() {
    let f = Fixture::new(SMALL);
    assert_eq!(code(&f.run("o", &[])), 0);
    let o = f.path("o");
    let m = f.manifest();
    assert_eq!(code(&arena(&["rank", "--out", &o])), 0);
    let out = arena(&["report", "--out", &o, "--manifest", &m]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(f.out("o").join("report.md")).unwrap();
    for section in ["## Agent means", "## Scenario means", "## Tag correlations", "## Method agreement"] {
        assert!(text.contains(section), "{section}");
    }
    assert!(!text.contains("_absent: no record"));
    assert!(f.out("o").join("agreement.csv").exists());
    assert_eq!(code(&arena(&["report", "--out", &o, "--manifest", &m])), 0);
    assert_eq!(text, fs::read_to_string(f.out("o").join("report.md")).unwrap());
    assert_eq!(stdout(&out), text);
}

#[test]
fn report_without_tags_marks_the_section_absent() {
    let f = Fixture::new(SMALL);
    assert_eq!(code(&f.run("o", &[])), 0);
    let o = f.path("o");
    assert_eq!(code(&arena(&["rank", "--out", &o, "--method", "elo"])), 0);
    let out = arena(&["report", "--out", &o]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("## Tag correlations\n\n_absent"));
}

#[test]
fn report_needs_its_inputs() {
    let f = Fixture::new(SMALL);
    let o = f.path("nothing");
    assert_eq!(code(&arena(&["report", "--out", &o])), 2);
    assert_eq!(code(&f.run("o", &[])), 0);
    let o = f.path("o");
    // results but no tables
    assert_eq!(code(&arena(&["report", "--out", &o])), 2);
}

#[test]
fn validate_accepts_a_good_manifest() {
    let f = Fixture::new(SMALL);
    let m = f.manifest();
    let out = arena(&["validate", "--manifest", &m]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn validate_lists_duplicate_ids() {
    let dup = SMALL.replace("scenario_id = \"labor-resident\"", "scenario_id = \"pd-visitor\"");
    let f = Fixture::new(&dup);
    let m = f.manifest();
    let out = arena(&["validate", "--manifest", &m]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("duplicate scenario id 'pd-visitor'"));
}

#[test]
fn veil_overlap_fails_validation_and_blocks_runs() {
    let overlap = format!(
        "{SMALL}\n[[scenarios]]\nscenario_id = \"pd-copy\"\nsubstrate_id = \"reality_show\"\nmode = \"visitor\"\n\
         background_strategy_id = \"grim_trigger\"\nphase = \"eval\"\ntags = [\"discouraging_antisocial_behavior\"]\n"
    );
    let f = Fixture::new(&overlap);
    let m = f.manifest();
    let out = arena(&["validate", "--manifest", &m]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("veil overlap"));
    let out = f.run("o", &["--phase", "eval"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("veil overlap"));
}

#[test]
fn validate_reports_roster_problems() {
    let bad = SMALL.replace("strategy = \"defector\"", "strategy = \"saboteur\"");
    let f = Fixture::new(&bad);
    let m = f.manifest();
    let out = arena(&["validate", "--manifest", &m]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("saboteur"));
}

#[test]
fn llm_agent_without_endpoint_is_a_usage_error() {
    let with_llm = format!("{SMALL}\n[[roster]]\nid = \"model\"\nkind = \"llm\"\n");
    let f = Fixture::new(&with_llm);
    let out = f.run("o", &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no endpoint"), "{}", stderr(&out));
}

#[test]
fn llm_agent_against_a_mock_endpoint() {
    let server = arena_llm::MockServer::content("C").unwrap();
    let manifest = r#"
seed = 1
runs = 1

[[roster]]
id = "model"
kind = "llm"
model = "mock"

[[roster]]
id = "defector"
strategy = "defector"

[[scenarios]]
scenario_id = "pd-visitor"
substrate_id = "reality_show"
mode = "visitor"
background_strategy_id = "grim_trigger"
phase = "dev"
"#;
    let f = Fixture::new(manifest);
    let url = server.base_url();
    let out = f.run("o", &["--llm-base-url", &url]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(server.served() > 0);
    let traj = fs::read_to_string(f.out("o").join("trajectories.jsonl")).unwrap();
    assert!(traj.contains("\"usage\""));
}
