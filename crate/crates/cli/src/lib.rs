//! Orchestration for the `heatcount` binary: load a config, run one
//! experiment on a sized thread pool, and persist CSV, optional SVG and a
//! manifest with content hashes.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod svg;
pub mod validate;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use heatcount_core::engine::{plus_state, HcRcme};
use heatcount_core::model::map_to_rc;

use config::{resolve_threads, Experiment, RunConfig, THREADS_ENV};
use manifest::{OutputFile, RcSource, RunManifest, SCHEMA_VERSION};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub serial: bool,
    pub svg: bool,
}

/// A finished run. `manifest.partial` marks runs with failed grid points.
#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

pub fn load_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

pub fn build_model(cfg: &RunConfig) -> anyhow::Result<(HcRcme, RcSource)> {
    let (rc, source) = match cfg.overrides {
        Some(rc) => {
            cfg.model.validate()?;
            (rc, RcSource::Override)
        }
        None => (map_to_rc(&cfg.model)?, RcSource::Mapped),
    };
    Ok((HcRcme::new(cfg.model, rc, plus_state())?, source))
}

pub fn run(experiment: Experiment, opts: &RunOptions) -> anyhow::Result<RunReport> {
    let cfg = load_config(opts.config.as_deref())?;
    let dir = cfg.output_dir(opts.out.as_deref());
    let env = std::env::var(THREADS_ENV).ok();
    let threads = resolve_threads(opts.serial, opts.threads, cfg.threads, env.as_deref())?;
    run_config(experiment, cfg, &dir, threads, opts.svg)
}

pub fn run_config(
    experiment: Experiment,
    cfg: RunConfig,
    dir: &Path,
    threads: usize,
    svg: bool,
) -> anyhow::Result<RunReport> {
    let started = Instant::now();
    let mut cfg = cfg.for_experiment(experiment)?;
    cfg.svg |= svg;
    if !(cfg.chi_eps > 0.0 && cfg.chi_eps.is_finite()) {
        anyhow::bail!("chi_eps must be > 0, got {}", cfg.chi_eps);
    }
    let grids = cfg.resolve_grids()?;
    let (model, rc_source) = build_model(&cfg)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building the thread pool")?;
    let outcome = pool.install(|| experiments::run_experiment(experiment, &model, &grids, &cfg))?;

    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut outputs = vec![OutputFile::write(dir, &format!("{experiment}.csv"), &outcome.table.to_csv()?)?];
    if cfg.svg {
        outputs.push(OutputFile::write(dir, &format!("{experiment}.svg"), outcome.svg.as_bytes())?);
    }
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        rc_params: *model.rc(),
        rc_source,
        threads,
        wall_time_s: started.elapsed().as_secs_f64(),
        partial: !outcome.failures.is_empty(),
        failures: outcome.failures,
        outputs,
        config: cfg,
    };
    manifest.write(dir)?;
    Ok(RunReport {
        dir: dir.to_path_buf(),
        manifest,
    })
}
