use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heatcount_cli::config::{Experiment, RunConfig};
use heatcount_cli::manifest::verify;
use heatcount_cli::validate::{has_errors, validate, Level};
use heatcount_cli::{load_config, run, RunOptions};

/// Heat counting statistics of the spin-boson model via the reaction
/// coordinate master equation.
#[derive(Parser)]
#[command(name = "heatcount", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to the config, then HEATCOUNT_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Run on a single thread.
    #[arg(long)]
    serial: bool,
    /// Also write an SVG quick-look plot.
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// <sigma_x(t)> from the master equation against the exact solution.
    BenchmarkDynamics(RunArgs),
    /// Characteristic functions on a chi grid.
    CfScan(RunArgs),
    /// Mean and variance of the heat.
    Moments(RunArgs),
    /// TLS and extended-system ergotropy.
    Ergotropy(RunArgs),
    /// Heat distributions reconstructed from the characteristic functions.
    Distribution(RunArgs),
    /// Dry-run checks of a configuration; writes nothing.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Experiment whose grids are checked; all when omitted.
        #[arg(long, value_enum)]
        experiment: Option<Experiment>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print diagnostics as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Recompute the output hashes recorded in a run manifest.
    Verify {
        /// Directory holding manifest.json.
        dir: PathBuf,
    },
}

fn execute(experiment: Experiment, args: RunArgs) -> anyhow::Result<ExitCode> {
    let opts = RunOptions {
        config: args.config,
        out: args.out,
        threads: args.threads,
        serial: args.serial,
        svg: args.svg,
    };
    let report = run(experiment, &opts)?;
    let m = &report.manifest;
    for out in &m.outputs {
        println!("wrote {}", report.dir.join(&out.path).display());
    }
    println!("wrote {}", report.dir.join("manifest.json").display());
    if m.partial {
        eprintln!("error: {} grid points failed (rows hold NaN):", m.failures.len());
        for f in &m.failures {
            eprintln!("  {f}");
        }
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn run_validate(config: Option<PathBuf>, experiment: Option<Experiment>, out: Option<PathBuf>, json: bool) -> anyhow::Result<ExitCode> {
    let cfg: RunConfig = match load_config(config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            if json {
                println!("{}", serde_json::json!([{"level": "error", "check": "config", "message": format!("{e:#}")}]));
            } else {
                println!("error   config: {e:#}");
            }
            return Ok(ExitCode::FAILURE);
        }
    };
    let dir = cfg.output_dir(out.as_deref());
    let diags = validate(&cfg, experiment, &dir);
    if json {
        println!("{}", serde_json::to_string_pretty(&diags)?);
    } else {
        for d in &diags {
            let tag = match d.level {
                Level::Ok => "ok",
                Level::Warning => "warning",
                Level::Error => "error",
            };
            println!("{tag:<7} {}: {}", d.check, d.message);
        }
    }
    Ok(if has_errors(&diags) { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BenchmarkDynamics(a) => execute(Experiment::BenchmarkDynamics, a),
        Command::CfScan(a) => execute(Experiment::CfScan, a),
        Command::Moments(a) => execute(Experiment::Moments, a),
        Command::Ergotropy(a) => execute(Experiment::Ergotropy, a),
        Command::Distribution(a) => execute(Experiment::Distribution, a),
        Command::Validate {
            config,
            experiment,
            out,
            json,
        } => run_validate(config, experiment, out, json),
        Command::Verify { dir } => verify(&dir).map(|problems| {
            if problems.is_empty() {
                println!("all output hashes match");
                ExitCode::SUCCESS
            } else {
                for p in problems {
                    eprintln!("mismatch: {p}");
                }
                ExitCode::FAILURE
            }
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
