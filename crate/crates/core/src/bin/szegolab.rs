use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use szegolab::acceptance::run_suite;
use szegolab::cli::{self, ExperimentConfig, Family, RunError, EXIT_CHECK_FAILED, EXIT_SCHEMA};
use szegolab::io::write_atomic;

#[derive(Parser)]
#[command(name = "szegolab", version, about = "Finite-gap Jacobi matrix experiments")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Run {
    #[arg(long)]
    config: PathBuf,
    /// CSV output, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Nested {
    Run(Run),
}

#[derive(Subcommand)]
enum Scan {
    Scan(Run),
}

#[derive(Subcommand)]
enum Command {
    /// Capacity, critical points and band masses; a bare set or a full config.
    Gapset {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        set: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    Torus(Run),
    Szego(Run),
    Dynamics {
        #[command(subcommand)]
        cmd: Nested,
    },
    Jost(Run),
    Asymptotics {
        #[command(subcommand)]
        cmd: Scan,
    },
    /// The acceptance suite.
    Suite {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        tolerance_factor: f64,
    },
}

fn run_config(args: &Run, family: Family) -> anyhow::Result<u8> {
    let outcome = ExperimentConfig::from_path(&args.config).and_then(|cfg| cli::run(&cfg, Some(family), args.out.as_deref()));
    finish(outcome, args.json.as_ref())
}

fn finish(outcome: Result<cli::RunReport, RunError>, json: Option<&PathBuf>) -> anyhow::Result<u8> {
    match outcome {
        Ok(report) => {
            print!("{}", report.summary());
            if let Some(p) = json {
                write_atomic(p, serde_json::to_string_pretty(&report)?.as_bytes())?;
            }
            if let Some(p) = &report.output {
                println!("wrote {}", p.display());
            }
            Ok(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Ok(n) = std::env::var("SZEGOLAB_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: SZEGOLAB_THREADS must be a positive integer, got '{n}'");
                return ExitCode::from(EXIT_SCHEMA as u8);
            }
        }
    }
    match dispatch(args.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_SCHEMA as u8)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Gapset { set, config, out, samples } => {
            let outcome = match (set, config) {
                (Some(path), _) => cli::read_set(&path).and_then(|s| cli::run(&cli::gapset_config(s, samples), None, out.as_deref())),
                (None, Some(path)) => {
                    ExperimentConfig::from_path(&path).and_then(|cfg| cli::run(&cfg, Some(Family::Gapset), out.as_deref()))
                }
                (None, None) => unreachable!("clap requires one of --set, --config"),
            };
            finish(outcome, None)
        }
        Command::Torus(r) => run_config(&r, Family::Torus),
        Command::Szego(r) => run_config(&r, Family::Szego),
        Command::Dynamics { cmd: Nested::Run(r) } => run_config(&r, Family::Dynamics),
        Command::Jost(r) => run_config(&r, Family::Jost),
        Command::Asymptotics { cmd: Scan::Scan(r) } => run_config(&r, Family::Asymptotics),
        Command::Suite { filter, json, tolerance_factor } => {
            let report = run_suite(filter.as_deref(), tolerance_factor);
            for c in &report.criteria {
                println!("{}", c.line());
            }
            if report.criteria.is_empty() {
                eprintln!("error: no criterion matches the filter");
                return Ok(EXIT_SCHEMA as u8);
            }
            if let Some(p) = json {
                write_atomic(&p, serde_json::to_string_pretty(&report)?.as_bytes()).context("writing suite report")?;
            }
            let failed: Vec<String> = report.criteria.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.id, c.title)).collect();
            if failed.is_empty() {
                println!("suite: all {} criteria pass", report.criteria.len());
                Ok(0)
            } else {
                println!("suite: FAILED {}", failed.join(", "));
                Ok(EXIT_CHECK_FAILED as u8)
            }
        }
    }
}
