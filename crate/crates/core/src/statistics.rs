//! Characteristic-function scans, finite-difference moments and
//! distribution reconstruction.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{CountingVariant, HcRcme};
use crate::error::{Error, Result};
use crate::ibm;
use crate::quadrature::QuadratureSpec;

/// Where characteristic-function values come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CfSource {
    Rcme(CountingVariant),
    /// Closed-form full-environment CF of the independent boson model.
    Exact,
}

impl CfSource {
    pub fn label(self) -> &'static str {
        match self {
            CfSource::Rcme(CountingVariant::FullEnvironment) => "F_rc",
            CfSource::Rcme(CountingVariant::ResidualEnvironment) => "R_rc",
            CfSource::Exact => "F_ex",
        }
    }
}

/// `Φ(χ, t)` sampled on a grid; `values[[i, k]]` is at `(chi_grid[i], t_grid[k])`.
#[derive(Debug, Clone)]
pub struct CFSeries {
    pub source: CfSource,
    pub chi_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub values: Array2<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    FiniteDifference,
    Analytic,
}

#[derive(Debug, Clone)]
pub struct MomentSeries {
    pub source: CfSource,
    pub t_grid: Vec<f64>,
    /// eV
    pub mean: Vec<f64>,
    /// eV²
    pub variance: Vec<f64>,
    /// Zero for analytic series.
    pub chi_eps: f64,
    pub method: MomentMethod,
}

fn check_chi_eps(chi_eps: f64) -> Result<()> {
    if !(chi_eps > 0.0 && chi_eps.is_finite()) {
        return Err(Error::param("chi_eps", format!("must be > 0, got {chi_eps}")));
    }
    Ok(())
}

/// `Im Φ(χ_ε) / χ_ε`. Error O(χ_ε²) for smooth CFs, O(χ_ε) in general.
pub fn fd_mean(phi_eps: C64, chi_eps: f64) -> Result<f64> {
    check_chi_eps(chi_eps)?;
    Ok(phi_eps.im / chi_eps)
}

/// `(2 − 2 Re Φ(χ_ε)) / χ_ε² − ⟨Q⟩²`. Error O(χ_ε²).
pub fn fd_variance(phi_eps: C64, mean: f64, chi_eps: f64) -> Result<f64> {
    check_chi_eps(chi_eps)?;
    Ok((2.0 - 2.0 * phi_eps.re) / (chi_eps * chi_eps) - mean * mean)
}

/// A grid point that could not be evaluated.
#[derive(Debug, Clone)]
pub struct PointFailure {
    pub chi: f64,
    pub source: CfSource,
    pub message: String,
}

/// Result of [`cf_scan`]. Failed points hold `NaN` and are listed in
/// `failures`.
#[derive(Debug, Clone)]
pub struct CfScan {
    pub series: Vec<CFSeries>,
    pub failures: Vec<PointFailure>,
}

impl CfScan {
    pub fn into_result(self) -> Result<Vec<CFSeries>> {
        match self.failures.first() {
            None => Ok(self.series),
            Some(f) => Err(Error::ContractViolation(format!(
                "{} of the scan points failed; first at chi = {} ({}): {}",
                self.failures.len(),
                f.chi,
                f.source.label(),
                f.message
            ))),
        }
    }

    pub fn get(&self, source: CfSource) -> Option<&CFSeries> {
        self.series.iter().find(|s| s.source == source)
    }
}

fn check_grids(chi_grid: &[f64], t_list: &[f64]) -> Result<()> {
    if chi_grid.is_empty() || t_list.is_empty() {
        return Err(Error::InvalidGrid("chi and t grids must be nonempty".into()));
    }
    if chi_grid.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidGrid("non-finite chi".into()));
    }
    if t_list.windows(2).any(|w| !(w[1] >= w[0])) || !(t_list[0] >= 0.0) {
        return Err(Error::InvalidGrid("t grid must be nonnegative and ascending".into()));
    }
    Ok(())
}

/// Evaluates every source at every `(χ, t)`. RCME variants share one
/// propagation per χ. Grid points run in parallel; output order follows
/// the input grids.
pub fn cf_scan(
    sources: &[CfSource],
    chi_grid: &[f64],
    t_list: &[f64],
    model: &HcRcme,
    quad: &QuadratureSpec,
) -> Result<CfScan> {
    check_grids(chi_grid, t_list)?;
    let variants: Vec<CountingVariant> = sources
        .iter()
        .filter_map(|s| match s {
            CfSource::Rcme(v) => Some(*v),
            CfSource::Exact => None,
        })
        .collect();
    let p = *model.params();

    let rows: Vec<Vec<std::result::Result<Vec<C64>, String>>> = chi_grid
        .par_iter()
        .map(|&chi| {
            let rc = if variants.is_empty() {
                Ok(Vec::new())
            } else {
                model.cf_trace(chi, t_list, &variants).map_err(|e| e.to_string())
            };
            sources
                .iter()
                .map(|s| match s {
                    CfSource::Rcme(v) => {
                        let k = variants.iter().position(|x| x == v).expect("collected above");
                        rc.as_ref().map(|r| r[k].clone()).map_err(Clone::clone)
                    }
                    CfSource::Exact => t_list
                        .iter()
                        .map(|&t| ibm::exact_cf_with(chi, t, &p, quad))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| e.to_string()),
                })
                .collect()
        })
        .collect();

    let mut failures = Vec::new();
    let series = sources
        .iter()
        .enumerate()
        .map(|(k, &source)| {
            let mut values = Array2::from_elem((chi_grid.len(), t_list.len()), C64::new(f64::NAN, f64::NAN));
            for (i, row) in rows.iter().enumerate() {
                match &row[k] {
                    Ok(v) => values.row_mut(i).assign(&ndarray::ArrayView1::from(v.as_slice())),
                    Err(message) => failures.push(PointFailure {
                        chi: chi_grid[i],
                        source,
                        message: message.clone(),
                    }),
                }
            }
            CFSeries {
                source,
                chi_grid: chi_grid.to_vec(),
                t_grid: t_list.to_vec(),
                values,
            }
        })
        .collect();
    Ok(CfScan { series, failures })
}

fn fd_series(source: CfSource, t_grid: &[f64], phi: &[C64], chi_eps: f64) -> Result<MomentSeries> {
    let mut mean = Vec::with_capacity(phi.len());
    let mut variance = Vec::with_capacity(phi.len());
    for &f in phi {
        let m = fd_mean(f, chi_eps)?;
        variance.push(fd_variance(f, m, chi_eps)?);
        mean.push(m);
    }
    Ok(MomentSeries {
        source,
        t_grid: t_grid.to_vec(),
        mean,
        variance,
        chi_eps,
        method: MomentMethod::FiniteDifference,
    })
}

/// Finite-difference moments from a single propagation at `χ = χ_ε`,
/// shared by all requested variants.
pub fn moment_series(
    variants: &[CountingVariant],
    t_grid: &[f64],
    chi_eps: f64,
    model: &HcRcme,
) -> Result<Vec<MomentSeries>> {
    check_chi_eps(chi_eps)?;
    check_grids(&[chi_eps], t_grid)?;
    let traces = model.cf_trace(chi_eps, t_grid, variants)?;
    variants
        .iter()
        .zip(&traces)
        .map(|(&v, phi)| fd_series(CfSource::Rcme(v), t_grid, phi, chi_eps))
        .collect()
}

/// Finite-difference moments of the closed-form CF.
pub fn exact_fd_moment_series(
    t_grid: &[f64],
    chi_eps: f64,
    model: &HcRcme,
    quad: &QuadratureSpec,
) -> Result<MomentSeries> {
    check_chi_eps(chi_eps)?;
    check_grids(&[chi_eps], t_grid)?;
    let p = *model.params();
    let phi: Vec<C64> = t_grid
        .par_iter()
        .map(|&t| ibm::exact_cf_with(chi_eps, t, &p, quad))
        .collect::<Result<_>>()?;
    fd_series(CfSource::Exact, t_grid, &phi, chi_eps)
}

/// Closed-form mean and variance of the full-environment heat.
pub fn exact_moment_series(t_grid: &[f64], model: &HcRcme, quad: &QuadratureSpec) -> Result<MomentSeries> {
    check_grids(&[0.0], t_grid)?;
    let p = *model.params();
    let pairs: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| Ok((ibm::exact_mean_with(t, &p, quad)?, ibm::exact_variance_with(t, &p, quad)?)))
        .collect::<Result<_>>()?;
    let (mean, variance) = pairs.into_iter().unzip();
    Ok(MomentSeries {
        source: CfSource::Exact,
        t_grid: t_grid.to_vec(),
        mean,
        variance,
        chi_eps: 0.0,
        method: MomentMethod::Analytic,
    })
}

/// Apodization applied before inverting the CF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// `exp(−χ²/(2w²))`.
    Gaussian { width: f64 },
    Rectangular,
}

impl Window {
    fn weight(&self, chi: f64) -> f64 {
        match *self {
            Window::Gaussian { width } => (-0.5 * (chi / width).powi(2)).exp(),
            Window::Rectangular => 1.0,
        }
    }
}

/// Reconstructed `P(Q, t)` on a heat grid.
#[derive(Debug, Clone)]
pub struct Distribution {
    pub q_grid: Vec<f64>,
    /// Normalized so that `Σ density · Δq = 1`.
    pub density: Vec<f64>,
    pub window: Window,
    /// Largest `|Im|` of the raw inversion relative to the largest `|Re|`.
    pub imag_residue: f64,
}

impl Distribution {
    pub fn spacing(&self) -> f64 {
        self.q_grid[1] - self.q_grid[0]
    }

    pub fn mean(&self) -> f64 {
        let dq = self.spacing();
        self.q_grid.iter().zip(&self.density).map(|(q, p)| q * p * dq).sum()
    }

    pub fn variance(&self) -> f64 {
        let dq = self.spacing();
        let m = self.mean();
        self.q_grid
            .iter()
            .zip(&self.density)
            .map(|(q, p)| (q - m).powi(2) * p * dq)
            .sum()
    }
}

fn uniform_spacing(grid: &[f64], what: &str) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid(format!("{what} grid needs at least two points")));
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::InvalidGrid(format!("{what} grid must be ascending")));
    }
    let uniform = grid
        .iter()
        .enumerate()
        .all(|(k, &x)| (x - (grid[0] + k as f64 * h)).abs() <= 1e-9 * h.max(x.abs()));
    if !uniform {
        return Err(Error::InvalidGrid(format!("{what} grid is not uniform")));
    }
    Ok(h)
}

/// Default window: Gaussian of width half the χ range.
pub fn default_window(chi_grid: &[f64]) -> Window {
    let range = chi_grid.last().copied().unwrap_or(0.0) - chi_grid.first().copied().unwrap_or(0.0);
    Window::Gaussian { width: 0.5 * range }
}

pub fn distribution_from_cf(series: &CFSeries, t_index: usize, q_grid: &[f64]) -> Result<Distribution> {
    distribution_from_cf_with(series, t_index, q_grid, default_window(&series.chi_grid))
}

/// `P(q) = (1/2π) Σ_k Δχ w(χ_k) Φ(χ_k) e^{−iqχ_k}`, renormalized on `q_grid`.
pub fn distribution_from_cf_with(
    series: &CFSeries,
    t_index: usize,
    q_grid: &[f64],
    window: Window,
) -> Result<Distribution> {
    let chi = &series.chi_grid;
    let dchi = uniform_spacing(chi, "chi")?;
    if (chi[0] + chi[chi.len() - 1]).abs() > 1e-9 * dchi {
        return Err(Error::InvalidGrid("chi grid must be symmetric about zero".into()));
    }
    let dq = uniform_spacing(q_grid, "q")?;
    if t_index >= series.t_grid.len() {
        return Err(Error::param("t_index", format!("out of range (len {})", series.t_grid.len())));
    }
    if let Window::Gaussian { width } = window {
        if !(width > 0.0) {
            return Err(Error::param("window width", "must be positive"));
        }
    }
    let weighted: Vec<C64> = chi
        .iter()
        .enumerate()
        .map(|(k, &c)| series.values[[k, t_index]] * window.weight(c))
        .collect();
    if weighted.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("characteristic function samples"));
    }
    let raw: Vec<C64> = q_grid
        .iter()
        .map(|&q| {
            let s: C64 = chi
                .iter()
                .zip(&weighted)
                .map(|(&c, &f)| f * C64::from_polar(1.0, -q * c))
                .sum();
            s * (dchi / (2.0 * PI))
        })
        .collect();
    let re_max = raw.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let im_max = raw.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let norm: f64 = raw.iter().map(|z| z.re).sum::<f64>() * dq;
    if !(norm.abs() > 0.0) {
        return Err(Error::Singular("reconstructed distribution has zero weight"));
    }
    Ok(Distribution {
        q_grid: q_grid.to_vec(),
        density: raw.iter().map(|z| z.re / norm).collect(),
        window,
        imag_residue: if re_max > 0.0 { im_max / re_max } else { 0.0 },
    })
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Points `lo, lo + step, ...` up to `hi` inclusive, computed by index.
pub fn step_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::InvalidGrid(format!("bad grid [{lo}, {hi}] step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}
