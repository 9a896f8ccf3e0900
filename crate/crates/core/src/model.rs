//! Physical parameters, spectral densities and the reaction-coordinate
//! mapping.
//!
//! Units: energies and angular frequencies in eV, times in ps, temperature
//! in K. Time exponents are formed as `ω t / ħ`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};

/// Fixed constants of the unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// eV · ps
    pub hbar: f64,
    /// eV / K
    pub k_boltzmann: f64,
}

pub const UNITS: UnitSystem = UnitSystem {
    hbar: 0.6582119569,
    k_boltzmann: 8.617333262e-5,
};

pub const HBAR: f64 = UNITS.hbar;
pub const K_B: f64 = UNITS.k_boltzmann;

/// Parameters of the unmapped spin-boson problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// TLS splitting ε (eV).
    pub epsilon: f64,
    /// Tunnelling Δ (eV).
    pub delta: f64,
    /// Dimensionless coupling α.
    pub alpha: f64,
    /// Peak width Γ (eV).
    pub gamma_width: f64,
    /// Peak centre ω₀ (eV).
    pub omega0: f64,
    /// Bath temperature (K).
    pub temperature: f64,
    /// Number of Fock states kept for the reaction coordinate.
    pub m_rc: usize,
    /// Hard cutoff (eV) applied to both spectral densities.
    pub omega_cut: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            epsilon: 2.0,
            delta: 0.0,
            alpha: 0.1,
            gamma_width: 0.001,
            omega0: 0.05,
            temperature: 300.0,
            m_rc: 20,
            omega_cut: 0.5,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("alpha", self.alpha),
            ("gamma_width", self.gamma_width),
            ("omega0", self.omega0),
            ("temperature", self.temperature),
            ("omega_cut", self.omega_cut),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(field, "must be finite"));
            }
        }
        let positive = [
            ("alpha", self.alpha),
            ("gamma_width", self.gamma_width),
            ("omega0", self.omega0),
            ("temperature", self.temperature),
        ];
        for (field, v) in positive {
            if v <= 0.0 {
                return Err(Error::param(field, format!("must be > 0, got {v}")));
            }
        }
        if self.m_rc < 2 {
            return Err(Error::param("m_rc", format!("must be >= 2, got {}", self.m_rc)));
        }
        if self.omega_cut <= self.omega0 {
            return Err(Error::param(
                "omega_cut",
                format!("must exceed omega0 ({} <= {})", self.omega_cut, self.omega0),
            ));
        }
        Ok(())
    }

    pub fn beta(&self) -> Result<f64> {
        beta_from_temperature(self.temperature)
    }
}

/// Mapped-frame parameters: RC frequency Ω, TLS–RC coupling λ and the
/// Ohmic residual coupling γ (all but γ in eV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RCParams {
    pub omega_rc: f64,
    pub lambda_rc: f64,
    pub gamma_rc: f64,
}

impl RCParams {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("omega_rc", self.omega_rc),
            ("lambda_rc", self.lambda_rc),
            ("gamma_rc", self.gamma_rc),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(field, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

fn check_frequency(omega: f64) -> Result<()> {
    if !(omega >= 0.0) {
        return Err(Error::param("omega", format!("must be >= 0, got {omega}")));
    }
    Ok(())
}

/// Underdamped Drude–Lorentz shape without the hard cutoff.
pub(crate) fn j_underdamped_shape(omega: f64, p: &ModelParams) -> f64 {
    let w0sq = p.omega0 * p.omega0;
    let detuning = w0sq - omega * omega;
    p.alpha * p.gamma_width * w0sq * omega
        / (detuning * detuning + (p.gamma_width * omega).powi(2))
}

/// `J_UD(ω) = αΓω₀²ω / ((ω₀² − ω²)² + (Γω)²)` for `ω ≤ ω_cut`, else 0.
pub fn j_underdamped(omega: f64, p: &ModelParams) -> Result<f64> {
    check_frequency(omega)?;
    if omega > p.omega_cut {
        return Ok(0.0);
    }
    Ok(j_underdamped_shape(omega, p))
}

/// `J_RC(ω) = γω` for `ω ≤ ω_cut`, else 0.
pub fn j_rc(omega: f64, rc: &RCParams, p: &ModelParams) -> Result<f64> {
    check_frequency(omega)?;
    if omega > p.omega_cut {
        return Ok(0.0);
    }
    Ok(rc.gamma_rc * omega)
}

/// Mapped parameters `Ω = ω₀`, `λ = √(παω₀/2)`, `γ = Γ/(2πω₀)`.
///
/// The result is checked against the reorganization-energy identity
/// `∫ J_UD(ω)/ω dω = λ²/Ω` (integrated to 200 ω₀).
pub fn map_to_rc(p: &ModelParams) -> Result<RCParams> {
    p.validate()?;
    let rc = RCParams {
        omega_rc: p.omega0,
        lambda_rc: (PI * p.alpha * p.omega0 / 2.0).sqrt(),
        gamma_rc: p.gamma_width / (2.0 * PI * p.omega0),
    };
    rc.validate()?;
    let reorg = reorganization_energy(p, Some(200.0 * p.omega0))?;
    let mapped = rc.lambda_rc * rc.lambda_rc / rc.omega_rc;
    let rel = (reorg - mapped).abs() / mapped;
    if rel >= 1e-3 {
        return Err(Error::ContractViolation(format!(
            "reorganization energy {reorg} disagrees with λ²/Ω = {mapped} (relative {rel:e})"
        )));
    }
    Ok(rc)
}

/// `1 / k_B T` in eV⁻¹.
pub fn beta_from_temperature(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::param(
            "temperature",
            format!("must be > 0, got {temperature}"),
        ));
    }
    Ok(1.0 / (K_B * temperature))
}

/// Bose–Einstein occupation `1 / (e^{βω} − 1)`.
pub fn bose_occupation(omega: f64, beta: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::param("omega", format!("must be > 0, got {omega}")));
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

/// Quadrature spec resolving the Lorentzian peak of `J_UD`.
pub(crate) fn peak_quadrature(p: &ModelParams, base: &QuadratureSpec) -> QuadratureSpec {
    let (w0, g) = (p.omega0, p.gamma_width);
    base.clone()
        .with_breakpoints([-20.0, -5.0, -1.0, 0.0, 1.0, 5.0, 20.0].map(|k| w0 + k * g))
}

/// `∫_0^cutoff J_UD(ω)/ω dω` (eV); the cutoff defaults to `ω_cut`.
pub fn reorganization_energy(p: &ModelParams, cutoff_override: Option<f64>) -> Result<f64> {
    reorganization_energy_with(p, cutoff_override, &QuadratureSpec::default())
}

pub fn reorganization_energy_with(
    p: &ModelParams,
    cutoff_override: Option<f64>,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let cutoff = cutoff_override.unwrap_or(p.omega_cut);
    if !(cutoff > 0.0) {
        return Err(Error::param("cutoff", "must be > 0"));
    }
    let spec = peak_quadrature(p, quad);
    let v = integrate(
        |w| C64::new(j_underdamped_shape(w, p) / w, 0.0),
        0.0,
        cutoff,
        &spec,
    )?;
    Ok(v.re)
}
