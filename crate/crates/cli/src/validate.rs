//! Dry-run checks of a configuration. Nothing is written.

use std::path::Path;

use heatcount_core::model::{map_to_rc, reorganization_energy, RCParams};
use heatcount_core::tolerances::TRUNCATION_OCCUPATION;
use serde::Serialize;

use crate::config::{Experiment, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Ok,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub level: Level,
    pub check: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn new(level: Level, check: &'static str, message: impl Into<String>) -> Self {
        Self {
            level,
            check,
            message: message.into(),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.level == Level::Error)
}

/// Probability that a Poisson variable with mean `mean` is at least `m`.
fn poisson_tail(mean: f64, m: usize) -> f64 {
    if mean == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let mut log_p = -mean;
    for k in 0..m {
        log_p += mean.ln() - ((k + 1) as f64).ln();
    }
    // summing the upper terms directly avoids cancellation when the tail is tiny
    let mut tail = 0.0;
    let mut k = m;
    loop {
        let term = log_p.exp();
        tail += term;
        k += 1;
        if (term < 1e-300 || term < 1e-17 * tail) && k as f64 > mean {
            break;
        }
        log_p += mean.ln() - (k as f64).ln();
    }
    tail
}

fn truncation_checks(cfg: &RunConfig, rc: &RCParams, out: &mut Vec<Diagnostic>) {
    let p = &cfg.model;
    let Ok(beta) = p.beta() else { return };
    let m = p.m_rc;
    let occupation = (-beta * rc.omega_rc * (m - 1) as f64).exp();
    out.push(Diagnostic::new(
        if occupation < TRUNCATION_OCCUPATION { Level::Ok } else { Level::Warning },
        "truncation-thermal",
        format!("Boltzmann weight of RC level {} is {occupation:.3e} (threshold {TRUNCATION_OCCUPATION:e})", m - 1),
    ));
    // the two TLS branches displace the RC by ∓λ/Ω; their overlap needs the
    // levels of a coherent state with amplitude 2λ/Ω
    let shift = 2.0 * rc.lambda_rc / rc.omega_rc;
    let tail = poisson_tail(shift * shift, m);
    out.push(Diagnostic::new(
        if tail < TRUNCATION_OCCUPATION { Level::Ok } else { Level::Warning },
        "truncation-displacement",
        format!(
            "weight beyond level {} of a coherent state displaced by 2*lambda/Omega = {shift:.3} is {tail:.3e} \
             (threshold {TRUNCATION_OCCUPATION:e}); branch overlaps may be under-resolved",
            m - 1
        ),
    ));
}

fn grid_checks(cfg: &RunConfig, experiment: Experiment, out: &mut Vec<Diagnostic>) {
    let cfg = match cfg.clone().for_experiment(experiment) {
        Ok(c) => c,
        Err(e) => {
            out.push(Diagnostic::new(Level::Error, "experiment", e.to_string()));
            return;
        }
    };
    match cfg.resolve_grids() {
        Ok(g) => {
            out.push(Diagnostic::new(
                Level::Ok,
                "grids",
                format!("{experiment}: {} t, {} chi, {} q points", g.t.len(), g.chi.len(), g.q.len()),
            ));
            if experiment == Experiment::Distribution {
                let uniform = |v: &[f64]| {
                    v.len() >= 2 && {
                        let h = v[1] - v[0];
                        h > 0.0 && v.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0))
                    }
                };
                let symmetric = g.chi.first().zip(g.chi.last()).is_some_and(|(a, b)| (a + b).abs() < 1e-9);
                if !(uniform(&g.chi) && symmetric) {
                    out.push(Diagnostic::new(Level::Error, "grids", "distribution needs a uniform chi grid symmetric about 0"));
                }
                if !uniform(&g.q) {
                    out.push(Diagnostic::new(Level::Error, "grids", "distribution needs a uniform q grid"));
                }
            }
        }
        Err(e) => out.push(Diagnostic::new(Level::Error, "grids", format!("{e:#}"))),
    }
}

fn output_check(dir: &Path, out: &mut Vec<Diagnostic>) {
    let probe = if dir.exists() {
        dir.to_path_buf()
    } else {
        match dir.parent() {
            Some(p) if p.as_os_str().is_empty() => Path::new(".").to_path_buf(),
            Some(p) => p.to_path_buf(),
            None => dir.to_path_buf(),
        }
    };
    match std::fs::metadata(&probe) {
        Ok(meta) if meta.is_dir() && !meta.permissions().readonly() => out.push(Diagnostic::new(
            Level::Ok,
            "output-dir",
            format!("{} is writable", dir.display()),
        )),
        Ok(_) => out.push(Diagnostic::new(Level::Error, "output-dir", format!("{} is not a writable directory", probe.display()))),
        Err(e) => out.push(Diagnostic::new(Level::Error, "output-dir", format!("{}: {e}", probe.display()))),
    }
}

/// Model and mapping checks, truncation heuristics, grid sanity for the
/// chosen experiment (or every experiment when none is chosen) and the
/// output directory.
pub fn validate(cfg: &RunConfig, experiment: Option<Experiment>, out_dir: &Path) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    match cfg.model.validate() {
        Ok(()) => out.push(Diagnostic::new(Level::Ok, "model", "parameters valid")),
        Err(e) => {
            out.push(Diagnostic::new(Level::Error, "model", e.to_string()));
            return out;
        }
    }
    let mapped = match map_to_rc(&cfg.model) {
        Ok(rc) => {
            let reorg = reorganization_energy(&cfg.model, Some(200.0 * cfg.model.omega0));
            let mapped = rc.lambda_rc * rc.lambda_rc / rc.omega_rc;
            let detail = match reorg {
                Ok(r) => format!("reorganization energy {r:.6e} eV vs lambda^2/Omega {mapped:.6e} eV"),
                Err(e) => e.to_string(),
            };
            out.push(Diagnostic::new(
                Level::Ok,
                "rc-mapping",
                format!(
                    "Omega = {:.6} eV, lambda = {:.6} eV, gamma = {:.6e}; {detail}",
                    rc.omega_rc, rc.lambda_rc, rc.gamma_rc
                ),
            ));
            Some(rc)
        }
        Err(e) => {
            out.push(Diagnostic::new(Level::Error, "rc-mapping", e.to_string()));
            None
        }
    };
    let rc = match cfg.overrides {
        Some(o) => match o.validate() {
            Ok(()) => {
                out.push(Diagnostic::new(Level::Warning, "rc-overrides", "using overridden RC parameters"));
                Some(o)
            }
            Err(e) => {
                out.push(Diagnostic::new(Level::Error, "rc-overrides", e.to_string()));
                None
            }
        },
        None => mapped,
    };
    if let Some(rc) = rc {
        truncation_checks(cfg, &rc, &mut out);
    }
    if !(cfg.chi_eps > 0.0 && cfg.chi_eps.is_finite()) {
        out.push(Diagnostic::new(Level::Error, "chi_eps", format!("must be > 0, got {}", cfg.chi_eps)));
    }
    if let Err(e) = cfg.quadrature.validate() {
        out.push(Diagnostic::new(Level::Error, "quadrature", e.to_string()));
    }
    match experiment.or(cfg.experiment) {
        Some(e) => grid_checks(cfg, e, &mut out),
        None => {
            for e in Experiment::ALL {
                grid_checks(cfg, e, &mut out);
            }
        }
    }
    output_check(out_dir, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use heatcount_core::model::ModelParams;

    #[test]
    fn poisson_tail_values() {
        assert!((poisson_tail(1.0, 1) - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
        assert_eq!(poisson_tail(0.0, 3), 0.0);
        assert!((poisson_tail(3.0, 0) - 1.0).abs() < 1e-14);
        let tiny = poisson_tail(0.1, 20);
        assert!(tiny > 0.0 && tiny < 1e-35, "{tiny}");
    }

    fn levels(d: &[Diagnostic], check: &str) -> Vec<Level> {
        d.iter().filter(|x| x.check == check).map(|x| x.level).collect()
    }

    #[test]
    fn defaults_pass() {
        let d = validate(&RunConfig::default(), None, Path::new("."));
        assert!(!has_errors(&d), "{d:#?}");
        assert_eq!(levels(&d, "truncation-thermal"), vec![Level::Ok]);
        // the displacement heuristic flags the default truncation
        assert_eq!(levels(&d, "truncation-displacement"), vec![Level::Warning]);
    }

    #[test]
    fn small_truncation_warns() {
        let cfg = RunConfig {
            model: ModelParams {
                m_rc: 2,
                ..ModelParams::default()
            },
            ..RunConfig::default()
        };
        let d = validate(&cfg, Some(Experiment::Moments), Path::new("."));
        assert!(!has_errors(&d));
        assert_eq!(levels(&d, "truncation-thermal"), vec![Level::Warning]);
    }

    #[test]
    fn cutoff_below_peak_is_an_error() {
        let cfg = RunConfig {
            model: ModelParams {
                omega_cut: 0.01,
                ..ModelParams::default()
            },
            ..RunConfig::default()
        };
        let d = validate(&cfg, None, Path::new("."));
        assert_eq!(levels(&d, "model"), vec![Level::Error]);
    }

    #[test]
    fn bad_grids_and_dirs() {
        let mut cfg: RunConfig =
            RunConfig::from_json(r#"{"grids": {"chi": {"values": [-1.0, 0.0, 2.0]}}, "chi_eps": -1}"#).unwrap();
        let d = validate(&cfg, Some(Experiment::Distribution), Path::new("/nonexistent/dir/out"));
        assert_eq!(levels(&d, "chi_eps"), vec![Level::Error]);
        assert!(levels(&d, "grids").contains(&Level::Error));
        assert_eq!(levels(&d, "output-dir"), vec![Level::Error]);
        cfg.chi_eps = 0.01;
        cfg.experiment = Some(Experiment::Moments);
        let d = validate(&cfg, Some(Experiment::CfScan), Path::new("."));
        assert_eq!(levels(&d, "experiment"), vec![Level::Error]);
    }
}
