use std::fs;
use std::path::{Path, PathBuf};

use arena_core::domain::Phase;
use arena_core::ranking::{rank, Method, RankingError, RankingTable};
use arena_core::reporting::build_report;
use arena_core::tournament::{run_crossplay, run_phase, PhaseOutput};
use log::info;

use crate::manifest::{EndpointOverrides, ManifestFile};
use crate::records::{read_records, write_jsonl, write_records};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PhaseArg {
    Dev,
    Eval,
    Crossplay,
}

#[derive(Clone, Debug)]
pub struct RunArgs {
    pub manifest: PathBuf,
    pub phase: PhaseArg,
    pub out: PathBuf,
    pub runs: Option<u32>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub endpoint: EndpointOverrides,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Run one phase and write `results.jsonl` and `trajectories.jsonl`.
pub fn cmd_run(args: &RunArgs) -> Result<PhaseOutput, CliError> {
    if args.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let mut file = ManifestFile::load(&args.manifest)?;
    if let Some(r) = args.runs {
        file.runs = r;
        if let Some(cp) = file.crossplay.as_mut() {
            cp.runs = Some(r);
        }
    }
    if let Some(s) = args.seed {
        file.seed = s;
    }
    if let Some(v) = file.veil_violation() {
        return Err(CliError::Veil(v));
    }
    let problems = file.violations();
    if !problems.is_empty() {
        return Err(CliError::Validation(problems.join("\n")));
    }
    let manifest = file.resolve(&args.endpoint)?;
    let output = match args.phase {
        PhaseArg::Dev => run_phase(&manifest, Phase::Development, args.workers)?,
        PhaseArg::Eval => run_phase(&manifest, Phase::Evaluation, args.workers)?,
        PhaseArg::Crossplay => {
            let config = manifest
                .crossplay
                .as_ref()
                .ok_or_else(|| CliError::Validation("the manifest has no [crossplay] table".into()))?;
            run_crossplay(config, &manifest.roster, manifest.master_seed, args.workers)?
        }
    };
    create_dir(&args.out)?;
    write_records(&args.out.join("results.jsonl"), &output.records)?;
    write_jsonl(&args.out.join("trajectories.jsonl"), &output.episodes)?;
    info!(
        "{} records from {} episodes written to {}",
        output.records.len(),
        output.episodes.len(),
        args.out.display()
    );
    Ok(output)
}

#[derive(Clone, Debug)]
pub struct RankArgs {
    pub results: PathBuf,
    pub out: PathBuf,
    pub methods: String,
    pub epsilon: f64,
}

pub fn table_stem(method: Method) -> String {
    format!("ranking_{}", method.name())
}

/// Rank the results with each requested method and write one CSV and one
/// markdown table per method.
pub fn cmd_rank(args: &RankArgs) -> Result<Vec<RankingTable>, CliError> {
    let methods = Method::parse_list(&args.methods).map_err(|e| CliError::Usage(e.to_string()))?;
    if methods.is_empty() {
        return Err(CliError::Usage("no ranking method given".into()));
    }
    if !args.epsilon.is_finite() || args.epsilon < 0.0 {
        return Err(CliError::Usage(format!("--epsilon must be non-negative, got {}", args.epsilon)));
    }
    let records = read_records(&args.results)?;
    let tables = methods
        .iter()
        .map(|&m| {
            rank(&records, m, args.epsilon).map_err(|e| match e {
                RankingError::NoComparisons | RankingError::TooFewAgents { .. } => {
                    CliError::Usage(format!("{}: no comparisons ({e})", m.name()))
                }
                other => CliError::Validation(format!("{}: {other}", m.name())),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    create_dir(&args.out)?;
    for t in &tables {
        let stem = table_stem(t.method);
        write_text(&args.out.join(format!("{stem}.csv")), &t.to_csv())?;
        write_text(&args.out.join(format!("{stem}.md")), &t.to_markdown())?;
    }
    Ok(tables)
}

#[derive(Clone, Debug)]
pub struct ReportArgs {
    pub results: PathBuf,
    /// Directory holding `ranking_*.csv` files.
    pub tables: PathBuf,
    /// Source of scenario tags; without it the tag section is absent.
    pub manifest: Option<PathBuf>,
    pub out: PathBuf,
}

fn load_tables(dir: &Path) -> Result<Vec<RankingTable>, CliError> {
    let mut tables = Vec::new();
    for m in Method::ALL {
        let path = dir.join(format!("{}.csv", table_stem(m)));
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            tables.push(RankingTable::from_csv(m, &text).map_err(|e| CliError::io(&path, e))?);
        }
    }
    if tables.is_empty() {
        return Err(CliError::Usage(format!("no ranking tables in {}", dir.display())));
    }
    Ok(tables)
}

/// Write `report.md` and `agreement.csv`.
pub fn cmd_report(args: &ReportArgs) -> Result<String, CliError> {
    let records = read_records(&args.results)?;
    let tables = load_tables(&args.tables)?;
    let scenarios = match &args.manifest {
        Some(p) => ManifestFile::load(p)?.scenarios,
        None => Vec::new(),
    };
    let report = build_report(&records, &scenarios, &tables).map_err(|e| CliError::Validation(e.to_string()))?;
    let text = report.to_markdown();
    create_dir(&args.out)?;
    write_text(&args.out.join("report.md"), &text)?;
    if let Some(cmp) = &report.comparison {
        write_text(&args.out.join("agreement.csv"), &cmp.agreement_csv())?;
    }
    Ok(text)
}

/// Every problem with the manifest, veil overlap included. Empty means
/// valid.
pub fn cmd_validate(manifest: &Path) -> Result<Vec<String>, CliError> {
    let file = ManifestFile::load(manifest)?;
    let mut problems = file.violations();
    if let Some(v) = file.veil_violation() {
        problems.push(v);
    }
    Ok(problems)
}
