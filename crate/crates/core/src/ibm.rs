//! Closed-form results for the independent boson model (Δ = 0): the exact
//! full-environment heat characteristic function, its first two moments and
//! the TLS coherence under pure dephasing.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{beta_from_temperature, j_underdamped, peak_quadrature, ModelParams, HBAR};
use crate::quadrature::{integrate_oscillatory, QuadratureSpec};

/// `1 − cos x` without cancellation near zero.
fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Quadrature spec for an integrand carrying `cos(ωt/ħ)` and optionally
/// `cos(ωχ)`, `sin(ωχ)` factors.
fn spec_for(p: &ModelParams, t: f64, chi: f64, base: &QuadratureSpec) -> QuadratureSpec {
    let mut spec = peak_quadrature(p, base);
    let mut width = p.omega_cut / 8.0;
    if t > 0.0 {
        width = width.min(PI * HBAR / t);
    }
    if chi != 0.0 {
        width = width.min(PI / chi.abs());
    }
    spec.max_panel_width = Some(match base.max_panel_width {
        Some(w) => w.min(width),
        None => width,
    });
    spec
}

fn j(p: &ModelParams, w: f64) -> f64 {
    // quadrature nodes are strictly inside (0, ω_cut]
    j_underdamped(w, p).unwrap_or(0.0)
}

/// Exponent of the exact characteristic function, `ln Φ_ex(χ, t)`.
pub fn exact_cf_exponent(chi: f64, t: f64, p: &ModelParams, quad: &QuadratureSpec) -> Result<C64> {
    if chi == 0.0 || t == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let beta = beta_from_temperature(p.temperature)?;
    let spec = spec_for(p, t, chi, quad);
    let integral = integrate_oscillatory(
        |w| {
            let weight = j(p, w) / (w * w) * one_minus_cos(w * t / HBAR);
            let re = coth(0.5 * beta * w) * one_minus_cos(w * chi);
            C64::new(weight * re, -weight * (w * chi).sin())
        },
        p.omega_cut,
        &spec,
    )?;
    Ok(-2.0 * integral)
}

/// Exact characteristic function of the full-environment heat.
pub fn exact_cf(chi: f64, t: f64, p: &ModelParams) -> Result<C64> {
    exact_cf_with(chi, t, p, &QuadratureSpec::default())
}

pub fn exact_cf_with(chi: f64, t: f64, p: &ModelParams, quad: &QuadratureSpec) -> Result<C64> {
    Ok(exact_cf_exponent(chi, t, p, quad)?.exp())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("must be >= 0, got {t}")));
    }
    Ok(())
}

/// `⟨Q⟩ = 2∫ J(ω)/ω (1 − cos ωt/ħ) dω` (eV).
pub fn exact_mean(t: f64, p: &ModelParams) -> Result<f64> {
    exact_mean_with(t, p, &QuadratureSpec::default())
}

pub fn exact_mean_with(t: f64, p: &ModelParams, quad: &QuadratureSpec) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let spec = spec_for(p, t, 0.0, quad);
    let v = integrate_oscillatory(
        |w| C64::new(j(p, w) / w * one_minus_cos(w * t / HBAR), 0.0),
        p.omega_cut,
        &spec,
    )?;
    Ok(2.0 * v.re)
}

/// `var Q = 2∫ J(ω) coth(βω/2) (1 − cos ωt/ħ) dω` (eV²).
pub fn exact_variance(t: f64, p: &ModelParams) -> Result<f64> {
    exact_variance_with(t, p, &QuadratureSpec::default())
}

pub fn exact_variance_with(t: f64, p: &ModelParams, quad: &QuadratureSpec) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let beta = beta_from_temperature(p.temperature)?;
    let spec = spec_for(p, t, 0.0, quad);
    let v = integrate_oscillatory(
        |w| C64::new(j(p, w) * coth(0.5 * beta * w) * one_minus_cos(w * t / HBAR), 0.0),
        p.omega_cut,
        &spec,
    )?;
    Ok(2.0 * v.re)
}

/// Pure-dephasing exponent `Γ(t) = 4∫ J(ω)/ω² coth(βω/2)(1 − cos ωt/ħ) dω`.
pub fn decoherence_exponent(t: f64, p: &ModelParams, quad: &QuadratureSpec) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let beta = beta_from_temperature(p.temperature)?;
    let spec = spec_for(p, t, 0.0, quad);
    let v = integrate_oscillatory(
        |w| {
            C64::new(
                j(p, w) / (w * w) * coth(0.5 * beta * w) * one_minus_cos(w * t / HBAR),
                0.0,
            )
        },
        p.omega_cut,
        &spec,
    )?;
    Ok(4.0 * v.re)
}

fn require_ibm(p: &ModelParams) -> Result<()> {
    if p.delta != 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "exact coherence needs delta = 0, got {}",
            p.delta
        )));
    }
    Ok(())
}

/// `⟨σ_x(t)⟩ = cos(εt/ħ) e^{−Γ(t)}` for the initial TLS state `|+⟩`.
pub fn exact_coherence(t: f64, p: &ModelParams) -> Result<f64> {
    exact_coherence_with(t, p, &QuadratureSpec::default())
}

pub fn exact_coherence_with(t: f64, p: &ModelParams, quad: &QuadratureSpec) -> Result<f64> {
    require_ibm(p)?;
    Ok((p.epsilon * t / HBAR).cos() * exact_coherence_envelope_with(t, p, quad)?)
}

/// The dephasing envelope `e^{−Γ(t)}`, i.e. `|⟨σ_+(t)⟩|·2`.
pub fn exact_coherence_envelope_with(t: f64, p: &ModelParams, quad: &QuadratureSpec) -> Result<f64> {
    require_ibm(p)?;
    Ok((-decoherence_exponent(t, p, quad)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn cf_normalization() {
        for t in [0.0, 1.0, 100.0, 1000.0] {
            assert_eq!(exact_cf(0.0, t, &p()).unwrap(), C64::new(1.0, 0.0));
        }
        for chi in [-2.0, 0.5, 3.0] {
            assert_eq!(exact_cf(chi, 0.0, &p()).unwrap(), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn cf_conjugate_symmetry_and_bound() {
        for (chi, t) in [(0.3, 2.0), (1.7, 50.0), (2.9, 1000.0), (10.0, 83.0)] {
            let a = exact_cf(chi, t, &p()).unwrap();
            let b = exact_cf(-chi, t, &p()).unwrap();
            assert!((a - b.conj()).norm() < 1e-9);
            assert!(a.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn moments_start_at_zero_and_stay_nonnegative() {
        assert_eq!(exact_mean(0.0, &p()).unwrap(), 0.0);
        assert_eq!(exact_variance(0.0, &p()).unwrap(), 0.0);
        for k in 0..200 {
            let t = 0.37 * k as f64;
            assert!(exact_mean(t, &p()).unwrap() >= 0.0);
            assert!(exact_variance(t, &p()).unwrap() >= 0.0);
        }
        assert!(exact_mean(-1.0, &p()).is_err());
    }

    #[test]
    fn long_time_mean_average() {
        let vals: Vec<f64> = (500..=1000).map(|t| exact_mean(t as f64, &p()).unwrap()).collect();
        let avg = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((avg / (PI * 0.1) - 1.0).abs() < 0.02, "{avg}");
    }

    fn variance_plateau(temp: f64) -> f64 {
        // averaged over five recurrence periods well past the transient
        let q = ModelParams { temperature: temp, ..p() };
        let ts: Vec<f64> = (0..200).map(|k| 3000.0 + k as f64 * 2.068).collect();
        ts.iter().map(|&t| exact_variance(t, &q).unwrap()).sum::<f64>() / ts.len() as f64
    }

    #[test]
    fn variance_temperature_scaling() {
        // the plateau follows coth(βω₀/2) of the peak
        let coth_at_peak = |temp: f64| coth(0.5 * beta_from_temperature(temp).unwrap() * 0.05);
        let ratio = variance_plateau(600.0) / variance_plateau(300.0);
        let expect = coth_at_peak(600.0) / coth_at_peak(300.0);
        assert!((ratio / expect - 1.0).abs() < 0.15, "{ratio} vs {expect}");
        // doubling once βω₀ ≪ 1
        let ratio_hot = variance_plateau(6000.0) / variance_plateau(3000.0);
        assert!((ratio_hot / 2.0 - 1.0).abs() < 0.15, "{ratio_hot}");
    }

    #[test]
    fn coherence_at_zero_and_regime_check() {
        assert_eq!(exact_coherence(0.0, &p()).unwrap(), 1.0);
        let q = ModelParams { delta: 0.1, ..p() };
        assert!(matches!(exact_coherence(1.0, &q), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn decoherence_exponent_matches_independent_integral() {
        let q = p();
        let beta = beta_from_temperature(q.temperature).unwrap();
        for t in [0.7, 12.0, 82.7, 250.0] {
            let spec = QuadratureSpec::default()
                .with_max_panel_width(PI * HBAR / t)
                .with_breakpoints([q.omega0]);
            let var_like = integrate_oscillatory(
                |w| {
                    let jw = j_underdamped(w, &q).unwrap();
                    C64::new(jw / (w * w) * (1.0 / (0.5 * beta * w).tanh()) * (1.0 - (w * t / HBAR).cos()), 0.0)
                },
                q.omega_cut,
                &spec,
            )
            .unwrap()
            .re;
            let g = decoherence_exponent(t, &q, &QuadratureSpec::default()).unwrap();
            assert!((g - 2.0 * (2.0 * var_like)).abs() < 1e-6 * g, "t={t}");
        }
    }
}
