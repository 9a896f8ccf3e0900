//! One function per experiment, each producing a fixed-schema table.

use anyhow::Context;
use heatcount_core::engine::{CountingVariant, HcRcme};
use heatcount_core::ergotropy::ergotropy_series;
use heatcount_core::ibm;
use heatcount_core::statistics::{
    cf_scan, default_window, distribution_from_cf_with, exact_moment_series, moment_series, CfSource,
};
use rayon::prelude::*;

use crate::config::{Experiment, ResolvedGrids, RunConfig};
use crate::manifest::Table;
use crate::svg::{line_plot, Series};

use CountingVariant::{FullEnvironment as Full, ResidualEnvironment as Residual};

pub struct Outcome {
    pub table: Table,
    /// Grid points that failed; their rows hold NaN.
    pub failures: Vec<String>,
    pub svg: String,
}

pub fn run_experiment(experiment: Experiment, model: &HcRcme, grids: &ResolvedGrids, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    match experiment {
        Experiment::BenchmarkDynamics => benchmark_dynamics(model, grids, cfg),
        Experiment::CfScan => cf_scan_table(model, grids, cfg),
        Experiment::Moments => moments(model, grids, cfg),
        Experiment::Ergotropy => ergotropy(model, grids),
        Experiment::Distribution => distribution(model, grids, cfg),
    }
}

fn benchmark_dynamics(model: &HcRcme, grids: &ResolvedGrids, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let t = &grids.t;
    let mut sx = Vec::with_capacity(t.len());
    model
        .dynamics_chi0_each(t, |s| {
            sx.push(s.sigma_x);
            Ok(())
        })
        .context("chi = 0 dynamics")?;
    let p = *model.params();
    let exact: Vec<f64> = t
        .par_iter()
        .map(|&ti| ibm::exact_coherence_with(ti, &p, &cfg.quadrature).with_context(|| format!("exact coherence at t = {ti} ps")))
        .collect::<anyhow::Result<_>>()?;
    let err: Vec<f64> = sx.iter().zip(&exact).map(|(a, b)| (a - b).abs()).collect();
    let svg = line_plot(
        "<sigma_x(t)>: RCME vs exact",
        "t (ps)",
        t,
        &[Series { label: "RCME", y: &sx }, Series { label: "exact", y: &exact }],
    );
    Ok(Outcome {
        table: Table::new(vec!["t_ps", "sx_rcme", "sx_exact", "abs_err"], vec![t.clone(), sx, exact, err]),
        failures: Vec::new(),
        svg,
    })
}

const CF_SOURCES: [CfSource; 3] = [CfSource::Rcme(Full), CfSource::Exact, CfSource::Rcme(Residual)];

fn cf_scan_table(model: &HcRcme, grids: &ResolvedGrids, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let scan = cf_scan(&CF_SOURCES, &grids.chi, &grids.t, model, &cfg.quadrature)?;
    let (nc, nt) = (grids.chi.len(), grids.t.len());
    let mut columns = vec![Vec::with_capacity(nc * nt); 2 + 2 * CF_SOURCES.len()];
    for (k, &t) in grids.t.iter().enumerate() {
        for (i, &chi) in grids.chi.iter().enumerate() {
            columns[0].push(t);
            columns[1].push(chi);
            for (s, series) in scan.series.iter().enumerate() {
                let z = series.values[[i, k]];
                columns[2 + 2 * s].push(z.re);
                columns[3 + 2 * s].push(z.im);
            }
        }
    }
    let failures = scan
        .failures
        .iter()
        .map(|f| format!("chi = {} ({}): {}", f.chi, f.source.label(), f.message))
        .collect();
    let table = Table::new(
        vec!["t_ps", "chi", "re_F_rc", "im_F_rc", "re_F_ex", "im_F_ex", "re_R_rc", "im_R_rc"],
        columns,
    );
    let first: Vec<&[f64]> = ["re_F_rc", "re_F_ex", "re_R_rc"]
        .iter()
        .map(|c| &table.column(c).expect("column exists")[..nc])
        .collect();
    let svg = line_plot(
        &format!("Re Phi(chi) at t = {} ps", grids.t[0]),
        "chi (1/eV)",
        &grids.chi,
        &[
            Series { label: "F_rc", y: first[0] },
            Series { label: "F_ex", y: first[1] },
            Series { label: "R_rc", y: first[2] },
        ],
    );
    Ok(Outcome { table, failures, svg })
}

fn moments(model: &HcRcme, grids: &ResolvedGrids, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let t = &grids.t;
    let mut rc = moment_series(&[Full, Residual], t, cfg.chi_eps, model)
        .with_context(|| format!("finite-difference moments at chi_eps = {}", cfg.chi_eps))?
        .into_iter();
    let (f, r) = (rc.next().expect("full"), rc.next().expect("residual"));
    let ex = exact_moment_series(t, model, &cfg.quadrature).context("closed-form moments")?;
    let svg = line_plot(
        "mean heat (eV)",
        "t (ps)",
        t,
        &[
            Series { label: "F_rc", y: &f.mean },
            Series { label: "F_ex", y: &ex.mean },
            Series { label: "R_rc", y: &r.mean },
        ],
    );
    Ok(Outcome {
        table: Table::new(
            vec!["t_ps", "mean_F_rc", "mean_F_ex", "mean_R_rc", "var_F_rc", "var_F_ex", "var_R_rc"],
            vec![t.clone(), f.mean, ex.mean, r.mean, f.variance, ex.variance, r.variance],
        ),
        failures: Vec::new(),
        svg,
    })
}

fn ergotropy(model: &HcRcme, grids: &ResolvedGrids) -> anyhow::Result<Outcome> {
    let r = ergotropy_series(model, &grids.t).context("ergotropy series")?;
    let svg = line_plot(
        "ergotropy (eV)",
        "t (ps)",
        &r.t_grid,
        &[
            Series { label: "TLS", y: &r.tls_ergotropy },
            Series { label: "TLS+RC", y: &r.es_ergotropy },
        ],
    );
    Ok(Outcome {
        table: Table::new(
            vec!["t_ps", "tls_ergotropy", "es_ergotropy", "sigma_x", "coherence"],
            vec![r.t_grid, r.tls_ergotropy, r.es_ergotropy, r.sigma_x, r.coherence],
        ),
        failures: Vec::new(),
        svg,
    })
}

fn distribution(model: &HcRcme, grids: &ResolvedGrids, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let sources = [CfSource::Rcme(Full), CfSource::Rcme(Residual), CfSource::Exact];
    let series = cf_scan(&sources, &grids.chi, &grids.t, model, &cfg.quadrature)?
        .into_result()
        .context("characteristic-function scan for the distribution")?;
    let window = cfg.window.unwrap_or_else(|| default_window(&grids.chi));
    let nq = grids.q.len();
    let mut columns = vec![Vec::with_capacity(nq * grids.t.len()); 2 + sources.len()];
    for (k, &t) in grids.t.iter().enumerate() {
        columns[0].extend(std::iter::repeat(t).take(nq));
        columns[1].extend_from_slice(&grids.q);
        for (s, cf) in series.iter().enumerate() {
            let d = distribution_from_cf_with(cf, k, &grids.q, window)
                .with_context(|| format!("inverting {} at t = {t} ps", cf.source.label()))?;
            columns[2 + s].extend(d.density);
        }
    }
    let table = Table::new(vec!["t_ps", "q", "p_F_rc", "p_R_rc", "p_F_ex"], columns);
    let head = |c: &str| &table.column(c).expect("column exists")[..nq];
    let svg = line_plot(
        &format!("P(Q) at t = {} ps", grids.t[0]),
        "Q (eV)",
        &grids.q,
        &[
            Series { label: "F_rc", y: head("p_F_rc") },
            Series { label: "R_rc", y: head("p_R_rc") },
            Series { label: "F_ex", y: head("p_F_ex") },
        ],
    );
    Ok(Outcome {
        table,
        failures: Vec::new(),
        svg,
    })
}
