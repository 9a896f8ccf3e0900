//! Heat-counting reaction coordinate master equation.
//!
//! The extended system (TLS ⊗ RC, ordering `index = s·M + n`) evolves under
//!
//! ```text
//! dρ/dt = −(i/ħ)[H_ES, ρ] − (1/ħ)(A A₁ρ − A ρ A₂(χ) − A₃(χ) ρ A + ρ A₄ A)
//! ```
//!
//! where `A = I ⊗ (a† + a)` couples to the Ohmic residual environment and
//! the rate operators are assembled in the `H_ES` eigenbasis from the
//! resonant (delta-function) part of the residual correlation functions.
//! Principal-value contributions and the counter term are not included.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    boson_annihilation, dagger, devectorize, hermitian_eig, hermiticity_defect, identity, kron,
    number_operator, partial_trace_rc, sigma_x, sigma_z, trace, vectorize, Operator, Propagator,
    SpectralDecomposition, SuperOperator, ONE, ZERO,
};
use crate::model::{bose_occupation, j_rc, map_to_rc, ModelParams, RCParams, HBAR};
use crate::tolerances;

/// Which Hamiltonian the two-point measurement projects onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingVariant {
    /// All bath modes of the unmapped problem (RC + residual environment).
    FullEnvironment,
    /// Only the residual environment left after the mapping.
    ResidualEnvironment,
}

impl CountingVariant {
    pub const ALL: [CountingVariant; 2] = [Self::FullEnvironment, Self::ResidualEnvironment];

    pub fn label(self) -> &'static str {
        match self {
            Self::FullEnvironment => "F",
            Self::ResidualEnvironment => "R",
        }
    }
}

/// `H_ES`, its eigendecomposition and the residual coupling operator.
#[derive(Debug, Clone)]
pub struct ExtendedSystem {
    pub m_rc: usize,
    /// `(ε/2)σ_z + (Δ/2)σ_x + Ω a†a + λ σ_z (a† + a)` (eV).
    pub h_es: Operator,
    pub spectral: SpectralDecomposition,
    /// `I ⊗ (a† + a)`.
    pub a_op: Operator,
    /// `⟨λ_j|A|λ_k⟩`.
    pub a_in_eigenbasis: Operator,
    /// `Ω I ⊗ a†a` (eV).
    pub h_rc: Operator,
    /// Bare TLS Hamiltonian `(ε/2)σ_z + (Δ/2)σ_x` (eV).
    pub h_s: Operator,
}

impl ExtendedSystem {
    pub fn dim(&self) -> usize {
        2 * self.m_rc
    }
}

pub fn tls_hamiltonian(p: &ModelParams) -> Operator {
    sigma_z() * C64::new(p.epsilon / 2.0, 0.0) + sigma_x() * C64::new(p.delta / 2.0, 0.0)
}

pub fn build_extended_system(p: &ModelParams, rc: &RCParams) -> Result<ExtendedSystem> {
    p.validate()?;
    rc.validate()?;
    let m = p.m_rc;
    let a = boson_annihilation(m)?;
    let x = &a + &dagger(&a);
    let n_op = number_operator(m)?;
    let h_s = tls_hamiltonian(p);
    let h_rc = kron(&identity(2), &n_op) * C64::new(rc.omega_rc, 0.0);
    let h_es = kron(&h_s, &identity(m))
        + &h_rc
        + kron(&sigma_z(), &x) * C64::new(rc.lambda_rc, 0.0);
    let spectral = hermitian_eig(&h_es)?;
    let a_op = kron(&identity(2), &x);
    let a_in_eigenbasis = spectral.to_eigenbasis(&a_op);
    Ok(ExtendedSystem {
        m_rc: m,
        h_es,
        spectral,
        a_op,
        a_in_eigenbasis,
        h_rc,
        h_s,
    })
}

/// The four χ-dressed rate operators, in both bases.
#[derive(Debug, Clone)]
pub struct RateOperators {
    pub chi: f64,
    /// `[Â₁, Â₂(χ), Â₃(χ), Â₄]` in the `H_ES` eigenbasis (eV).
    pub eigenbasis: [Operator; 4],
    /// The same operators in the computational basis.
    pub computational: [Operator; 4],
}

impl RateOperators {
    pub fn a1(&self) -> &Operator {
        &self.computational[0]
    }
    pub fn a2(&self) -> &Operator {
        &self.computational[1]
    }
    pub fn a3(&self) -> &Operator {
        &self.computational[2]
    }
    pub fn a4(&self) -> &Operator {
        &self.computational[3]
    }
}

/// Per-entry rates `[A₁, A₂, A₃, A₄]_{mn} / A_{mn}` for one energy gap.
fn gap_rates(gap: f64, chi: f64, beta: f64, p: &ModelParams, rc: &RCParams) -> Result<[C64; 4]> {
    if gap.abs() < tolerances::ZERO_GAP_EV {
        // ω → 0 limit of J_RC(ω) N(ω) and J_RC(ω)(1 + N(ω))
        let v = C64::new(PI * rc.gamma_rc / beta, 0.0);
        return Ok([v; 4]);
    }
    let w = gap.abs();
    let j = j_rc(w, rc, p)?;
    if j == 0.0 {
        return Ok([ZERO; 4]);
    }
    let n = bose_occupation(w, beta)?;
    let absorb = PI * j * n;
    let emit = PI * j * (1.0 + n);
    let phase = C64::from_polar(1.0, chi * w);
    Ok(if gap > 0.0 {
        [
            C64::new(absorb, 0.0),
            emit * phase,
            absorb * phase.conj(),
            C64::new(emit, 0.0),
        ]
    } else {
        [
            C64::new(emit, 0.0),
            absorb * phase.conj(),
            emit * phase,
            C64::new(absorb, 0.0),
        ]
    })
}

pub fn rate_operators(es: &ExtendedSystem, chi: f64, p: &ModelParams, rc: &RCParams) -> Result<RateOperators> {
    let beta = p.beta()?;
    let d = es.dim();
    let lambdas = &es.spectral.eigenvalues;
    let mut eig: [Operator; 4] = std::array::from_fn(|_| Array2::zeros((d, d)));
    for m in 0..d {
        for n in 0..d {
            let a_mn = es.a_in_eigenbasis[[m, n]];
            if a_mn == ZERO {
                continue;
            }
            let rates = gap_rates(lambdas[m] - lambdas[n], chi, beta, p, rc)?;
            for (op, r) in eig.iter_mut().zip(rates) {
                op[[m, n]] = a_mn * r;
            }
        }
    }
    let computational = std::array::from_fn(|k| es.spectral.from_eigenbasis(&eig[k]));
    Ok(RateOperators {
        chi,
        eigenbasis: eig,
        computational,
    })
}

/// Generator in ps⁻¹ from precomputed rate operators.
pub fn liouvillian_from_rates(es: &ExtendedSystem, rates: &RateOperators) -> SuperOperator {
    let d = es.dim();
    let id = identity(d);
    let a = &es.a_op;
    let inv_hbar = 1.0 / HBAR;
    let mut l = SuperOperator::zeros(d);
    l.add_sandwich(C64::new(0.0, -inv_hbar), &es.h_es, &id);
    l.add_sandwich(C64::new(0.0, inv_hbar), &id, &es.h_es);
    l.add_sandwich(C64::new(-inv_hbar, 0.0), &a.dot(rates.a1()), &id);
    l.add_sandwich(C64::new(inv_hbar, 0.0), a, rates.a2());
    l.add_sandwich(C64::new(inv_hbar, 0.0), rates.a3(), a);
    l.add_sandwich(C64::new(-inv_hbar, 0.0), &id, &rates.a4().dot(a));
    l
}

/// `𝓛_ES(χ)` in ps⁻¹.
pub fn build_liouvillian(es: &ExtendedSystem, chi: f64, p: &ModelParams, rc: &RCParams) -> Result<SuperOperator> {
    let rates = rate_operators(es, chi, p, rc)?;
    Ok(liouvillian_from_rates(es, &rates))
}

/// χ-dressed extended-system operator (column-stacked).
#[derive(Debug, Clone)]
pub struct GeneralizedState {
    pub chi: f64,
    pub variant: CountingVariant,
    pub t: f64,
    pub vec: Array1<C64>,
}

impl GeneralizedState {
    pub fn matrix(&self) -> Operator {
        devectorize(&self.vec).expect("state vectors are square by construction")
    }
}

/// `|+⟩⟨+|` with `|+⟩ = (|e⟩ + |g⟩)/√2`.
pub fn plus_state() -> Operator {
    Array2::from_elem((2, 2), C64::new(0.5, 0.0))
}

pub fn validate_tls_state(rho: &Operator) -> Result<()> {
    if rho.dim() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.nrows(),
        });
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > tolerances::STATE_TRACE {
        return Err(Error::ContractViolation(format!("initial TLS state has trace {tr}")));
    }
    if hermiticity_defect(rho) > tolerances::HERMITICITY_REL {
        return Err(Error::ContractViolation("initial TLS state is not Hermitian".into()));
    }
    Ok(())
}

/// Diagonal of `e^{−(β + iχ)Ωn} / Σ_n e^{−βΩn}` for the full-environment
/// variant, or of the RC Gibbs state for the residual variant.
fn rc_initial_diagonal(variant: CountingVariant, chi: f64, beta: f64, omega: f64, m: usize) -> Vec<C64> {
    let z: f64 = (0..m).map(|n| (-beta * omega * n as f64).exp()).sum();
    (0..m)
        .map(|n| {
            let e = n as f64 * omega;
            let pop = (-beta * e).exp() / z;
            match variant {
                CountingVariant::FullEnvironment => C64::from_polar(pop, -chi * e),
                CountingVariant::ResidualEnvironment => C64::new(pop, 0.0),
            }
        })
        .collect()
}

pub fn initial_state(
    variant: CountingVariant,
    chi: f64,
    rho_s0: &Operator,
    p: &ModelParams,
    rc: &RCParams,
) -> Result<GeneralizedState> {
    validate_tls_state(rho_s0)?;
    let beta = p.beta()?;
    let diag = rc_initial_diagonal(variant, chi, beta, rc.omega_rc, p.m_rc);
    let rho_rc = Array2::from_diag(&Array1::from_vec(diag));
    Ok(GeneralizedState {
        chi,
        variant,
        t: 0.0,
        vec: vectorize(&kron(rho_s0, &rho_rc)),
    })
}

/// Weights `w_i` such that the CF is `Σ_i w_i ρ_ii`.
pub fn readout_weights(variant: CountingVariant, chi: f64, es: &ExtendedSystem) -> Array1<C64> {
    es.h_rc
        .diag()
        .mapv(|e| match variant {
            CountingVariant::FullEnvironment => C64::from_polar(1.0, chi * e.re),
            CountingVariant::ResidualEnvironment => ONE,
        })
}

fn weighted_trace(v: &Array1<C64>, weights: &Array1<C64>) -> C64 {
    let d = weights.len();
    weights.iter().enumerate().map(|(i, w)| w * v[i * d + i]).sum()
}

/// `Tr[e^{iχH_RC} ρ(χ,t)]` (full environment) or `Tr[σ(χ,t)]` (residual).
pub fn cf_value(state: &GeneralizedState, es: &ExtendedSystem) -> C64 {
    weighted_trace(&state.vec, &readout_weights(state.variant, state.chi, es))
}

/// One sample of the χ = 0 trajectory.
#[derive(Debug, Clone)]
pub struct DynamicsSample {
    pub t: f64,
    pub rho_s: Operator,
    pub sigma_x: f64,
    pub rho_es: Operator,
}

impl DynamicsSample {
    /// `2|ρ_eg|`, the magnitude of the transverse Bloch vector.
    pub fn coherence_magnitude(&self) -> f64 {
        2.0 * self.rho_s[[0, 1]].norm()
    }
}

/// Model, mapped parameters, extended system and initial TLS state bundled
/// for repeated propagation.
#[derive(Debug, Clone)]
pub struct HcRcme {
    params: ModelParams,
    rc: RCParams,
    es: ExtendedSystem,
    rho_s0: Operator,
}

impl HcRcme {
    pub fn new(params: ModelParams, rc: RCParams, rho_s0: Operator) -> Result<Self> {
        validate_tls_state(&rho_s0)?;
        let es = build_extended_system(&params, &rc)?;
        Ok(Self {
            params,
            rc,
            es,
            rho_s0,
        })
    }

    /// Mapped parameters from [`map_to_rc`] and the TLS starting in `|+⟩`.
    pub fn from_params(params: ModelParams) -> Result<Self> {
        let rc = map_to_rc(&params)?;
        Self::new(params, rc, plus_state())
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn rc(&self) -> &RCParams {
        &self.rc
    }

    pub fn extended_system(&self) -> &ExtendedSystem {
        &self.es
    }

    pub fn rho_s0(&self) -> &Operator {
        &self.rho_s0
    }

    pub fn rate_operators(&self, chi: f64) -> Result<RateOperators> {
        rate_operators(&self.es, chi, &self.params, &self.rc)
    }

    pub fn generator(&self, chi: f64) -> Result<SuperOperator> {
        build_liouvillian(&self.es, chi, &self.params, &self.rc)
    }

    pub fn initial_state(&self, variant: CountingVariant, chi: f64) -> Result<GeneralizedState> {
        initial_state(variant, chi, &self.rho_s0, &self.params, &self.rc)
    }

    /// Characteristic function at each time for each requested variant,
    /// from one generator build. Indexed `[variant][time]`.
    pub fn cf_trace(&self, chi: f64, times: &[f64], variants: &[CountingVariant]) -> Result<Vec<Vec<C64>>> {
        let mut prop = Propagator::new(&self.generator(chi)?)?;
        let mut initial: Vec<Array1<C64>> = variants
            .iter()
            .map(|&v| self.initial_state(v, chi).map(|s| s.vec))
            .collect::<Result<_>>()?;
        // blocks holding no diagonal entry never reach the readout
        let d = self.es.dim();
        for block in prop.block_indices() {
            if !block.iter().any(|&i| i % (d + 1) == 0) {
                for v in initial.iter_mut() {
                    for &i in block {
                        v[i] = ZERO;
                    }
                }
            }
        }
        let weights: Vec<Array1<C64>> = variants
            .iter()
            .map(|&v| readout_weights(v, chi, &self.es))
            .collect();
        let mut out = vec![Vec::with_capacity(times.len()); variants.len()];
        prop.evolve_each(&initial, times, |_, _, states| {
            for (k, v) in states.iter().enumerate() {
                out[k].push(weighted_trace(v, &weights[k]));
            }
            Ok(())
        })?;
        Ok(out)
    }

    /// Generalized states at the requested times.
    pub fn propagate_state(&self, variant: CountingVariant, chi: f64, times: &[f64]) -> Result<Vec<GeneralizedState>> {
        let mut prop = Propagator::new(&self.generator(chi)?)?;
        let init = self.initial_state(variant, chi)?;
        let trajectory = prop.evolve(&init.vec, times)?;
        Ok(times
            .iter()
            .zip(trajectory.states)
            .map(|(&t, vec)| GeneralizedState { chi, variant, t, vec })
            .collect())
    }

    /// Streams the χ = 0 trajectory to `visit`.
    pub fn dynamics_chi0_each<F>(&self, times: &[f64], mut visit: F) -> Result<()>
    where
        F: FnMut(&DynamicsSample) -> Result<()>,
    {
        let mut prop = Propagator::new(&self.generator(0.0)?)?;
        let init = self.initial_state(CountingVariant::ResidualEnvironment, 0.0)?;
        let sx = sigma_x();
        let m = self.es.m_rc;
        prop.evolve_each(std::slice::from_ref(&init.vec), times, |_, t, states| {
            let rho_es = devectorize(&states[0])?;
            let rho_s = partial_trace_rc(&rho_es, 2, m)?;
            let sigma_x = trace(&sx.dot(&rho_s)).re;
            visit(&DynamicsSample {
                t,
                rho_s,
                sigma_x,
                rho_es,
            })
        })
    }

    pub fn dynamics_chi0(&self, times: &[f64]) -> Result<Vec<DynamicsSample>> {
        let mut out = Vec::with_capacity(times.len());
        self.dynamics_chi0_each(times, |s| {
            out.push(s.clone());
            Ok(())
        })?;
        Ok(out)
    }
}

/// χ = 0 dynamics: reduced TLS state, `⟨σ_x⟩` and the extended-system state.
pub fn dynamics_chi0(
    p: &ModelParams,
    rc: &RCParams,
    rho_s0: &Operator,
    times: &[f64],
) -> Result<Vec<DynamicsSample>> {
    HcRcme::new(*p, *rc, rho_s0.clone())?.dynamics_chi0(times)
}
