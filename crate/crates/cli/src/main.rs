use std::path::PathBuf;
use std::process::ExitCode;

use arena_cli::{cmd_rank, cmd_report, cmd_run, cmd_validate, CliError, EndpointOverrides, PhaseArg, RankArgs, ReportArgs, RunArgs};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arena", version, about = "Run cooperation tournaments and rank the entrants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one phase of a manifest and write results.jsonl and trajectories.jsonl.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "dev")]
        phase: PhaseArg,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the manifest's runs per scenario.
        #[arg(long)]
        runs: Option<u32>,
        /// Override the manifest's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        llm_base_url: Option<String>,
        #[arg(long)]
        llm_model: Option<String>,
    },
    /// Rank a results file with one or more methods.
    Rank {
        /// Results file; defaults to <out>/results.jsonl.
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated: elo, copeland, ranked_pairs, iml, ewa, or all.
        #[arg(long, default_value = "all")]
        method: String,
        /// Score differences at or below this count as ties.
        #[arg(long, default_value_t = arena_core::ranking::DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Summarize results and ranking tables into report.md.
    Report {
        #[arg(long)]
        results: Option<PathBuf>,
        /// Directory with the ranking tables; defaults to <out>.
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Manifest with the scenario tags.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a manifest without running anything.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            manifest,
            phase,
            out,
            runs,
            seed,
            workers,
            llm_base_url,
            llm_model,
        } => {
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let output = cmd_run(&RunArgs {
                manifest,
                phase,
                out: out.clone(),
                runs,
                seed,
                workers,
                endpoint: EndpointOverrides {
                    base_url: llm_base_url,
                    model: llm_model,
                },
            })?;
            println!("{} records written to {}", output.records.len(), out.join("results.jsonl").display());
        }
        Command::Rank {
            results,
            out,
            method,
            epsilon,
        } => {
            let results = results.unwrap_or_else(|| out.join("results.jsonl"));
            for t in cmd_rank(&RankArgs {
                results,
                out,
                methods: method,
                epsilon,
            })? {
                println!("## {}\n\n{}", t.method.title(), t.to_markdown());
            }
        }
        Command::Report {
            results,
            tables,
            manifest,
            out,
        } => {
            let text = cmd_report(&ReportArgs {
                results: results.unwrap_or_else(|| out.join("results.jsonl")),
                tables: tables.unwrap_or_else(|| out.clone()),
                manifest,
                out,
            })?;
            print!("{text}");
        }
        Command::Validate { manifest } => {
            let problems = cmd_validate(&manifest)?;
            if !problems.is_empty() {
                for p in &problems {
                    println!("{p}");
                }
                return Err(CliError::Validation(format!("{} problem(s) found", problems.len())).into());
            }
            println!("ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::code);
            ExitCode::from(code as u8)
        }
    }
}
