//! Command-line pipeline around `subscale-core`: Sobol sensitivity with surrogate
//! re-ranking, the L/D variability study across wing model structures, scaled
//! experiment design, and a markdown report over the recorded runs.
//!
//! Each invocation appends one [`record::RunRecord`] to `runs.jsonl` in the output
//! directory.

pub mod baseline;
pub mod commands;
pub mod config;
pub mod error;
pub mod models;
pub mod output;
pub mod record;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::baseline::Baseline;
use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::output::Artifacts;
use crate::record::{RunRecord, Stats};

#[derive(Debug, Parser)]
#[command(name = "subscale", version, about = "Sensitivity-driven sub-scale experiment design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Pipeline configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed override for every sampled stage.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Worker threads for model evaluation (default: all cores).
    #[arg(long, global = true, value_name = "INT")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Saltelli design, Sobol indices and surrogate comparison.
    Sensitivity,
    /// L/D spread across wing model structures on shared inputs.
    LdStudy,
    /// Similitude-constrained scaled-experiment optimization.
    ScaleOpt,
    /// Markdown summary of the latest successful runs in the output directory.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sensitivity => "sensitivity",
            Command::LdStudy => "ld-study",
            Command::ScaleOpt => "scale-opt",
            Command::Report => "report",
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.sampler.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli, cfg: &PipelineConfig, art: &mut Artifacts, stats: &mut Stats) -> Result<(), CliError> {
    let mut work = move || match cli.command {
        Command::Sensitivity => commands::sensitivity::run(cfg, art, stats),
        Command::LdStudy => commands::ld_study::run(cfg, art, stats),
        Command::ScaleOpt => commands::scale_opt::run(cfg, art, stats),
        Command::Report => stats.time("report", || commands::report::run(art)),
    };
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
            pool.install(work)
        }
        None => work(),
    }
}

/// Runs one command and appends its run record. Returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be positive");
        return 2;
    }
    let cfg = match load_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            // The output directory is only known for sure when given on the command line.
            if let Some(dir) = &cli.out {
                let _ = record::append(dir, &make_record(cli, None, &Stats::default(), &[], Err(&e)));
            }
            return e.exit_code();
        }
    };
    let mut stats = Stats::default();
    let result = Artifacts::new(&cfg.output_dir).map(|mut art| {
        let r = dispatch(cli, &cfg, &mut art, &mut stats);
        (art, r)
    });
    let (manifest, result) = match result {
        Ok((art, r)) => (art.manifest().to_vec(), r),
        Err(e) => (Vec::new(), Err(e)),
    };
    let hash = (cli.command != Command::Report || cli.config.is_some()).then(|| cfg.hash());
    let rec = make_record(cli, hash, &stats, &manifest, result.as_ref().map(|_| ()));
    if let Err(e) = record::append(&cfg.output_dir, &rec) {
        eprintln!("error: cannot append run record: {e}");
        if result.is_ok() {
            return e.exit_code();
        }
    }
    match result {
        Ok(()) => {
            for m in &manifest {
                println!("{}", cfg.output_dir.join(m).display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn make_record(
    cli: &Cli,
    config_hash: Option<String>,
    stats: &Stats,
    manifest: &[String],
    result: Result<(), &CliError>,
) -> RunRecord {
    RunRecord {
        command: cli.command.name().into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        baseline_version: Baseline::embedded().version,
        config_hash,
        seed: stats.seed,
        sampler: stats.sampler.clone(),
        threads: cli.threads.unwrap_or_else(rayon::current_num_threads),
        timings: stats.timings.clone(),
        evaluations: stats.evaluations,
        failures: stats.failures,
        manifest: manifest.to_vec(),
        status: match result {
            Ok(()) => "ok".into(),
            Err(e) => e.kind().into(),
        },
        exit_code: result.map_or_else(|e| e.exit_code(), |_| 0),
        message: result.err().map(|e| e.to_string()),
    }
}
