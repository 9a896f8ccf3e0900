//! Ergotropy via passive states: populations sorted in decreasing order
//! are placed on energy levels sorted in increasing order.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::engine::HcRcme;
use crate::error::{Error, Result};
use crate::linalg::{dagger, hermitian_eig, hermitian_eigenvalues, trace, Operator, SpectralDecomposition, ONE};
use crate::model::{ModelParams, RCParams};

fn check_pair(rho: &Operator, h: &Operator) -> Result<()> {
    if rho.dim() != h.dim() || !rho.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            got: rho.nrows(),
        });
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > 1e-6 {
        return Err(Error::ContractViolation(format!("state has trace {tr}")));
    }
    Ok(())
}

/// Populations of `rho` in decreasing order.
fn sorted_populations(rho: &Operator) -> Result<Vec<f64>> {
    let mut r = hermitian_eigenvalues(rho)?.to_vec();
    r.sort_by(|a, b| b.total_cmp(a));
    Ok(r)
}

/// `Σ_j r_j |ε_j⟩⟨ε_j|` with `r_1 ≥ r_2 ≥ …` and `ε_1 ≤ ε_2 ≤ …`.
pub fn passive_state(rho: &Operator, h: &Operator) -> Result<Operator> {
    check_pair(rho, h)?;
    let r = sorted_populations(rho)?;
    let energies = hermitian_eig(h)?;
    let v = &energies.eigenvectors;
    let d = Operator::from_diag(&ndarray::Array1::from_iter(r.iter().map(|&x| C64::new(x, 0.0))));
    Ok(v.dot(&d).dot(&dagger(v)))
}

fn ergotropy_in(rho: &Operator, h: &Operator, energies: &SpectralDecomposition) -> Result<f64> {
    let r = sorted_populations(rho)?;
    let passive: f64 = r.iter().zip(energies.eigenvalues.iter()).map(|(r, e)| r * e).sum();
    Ok(trace(&h.dot(rho)).re - passive)
}

/// `Tr[hρ] − Tr[h P(ρ)]` with `P` the passive state.
pub fn ergotropy(rho: &Operator, h: &Operator) -> Result<f64> {
    check_pair(rho, h)?;
    ergotropy_in(rho, h, &hermitian_eig(h)?)
}

/// `Σ_{jk} r_j ε_k (|⟨r_j|ε_k⟩|² − δ_jk)` with both spectra ordered as for
/// the passive state.
pub fn ergotropy_double_sum(rho: &Operator, h: &Operator) -> Result<f64> {
    check_pair(rho, h)?;
    let state = hermitian_eig(rho)?;
    let energies = hermitian_eig(h)?;
    let n = rho.nrows();
    // hermitian_eig is ascending; populations must be descending
    let order: Vec<usize> = (0..n).rev().collect();
    let overlaps = dagger(&state.eigenvectors).dot(&energies.eigenvectors);
    let mut total = 0.0;
    for (j, &sj) in order.iter().enumerate() {
        let r = state.eigenvalues[sj];
        for k in 0..n {
            let delta = if j == k { 1.0 } else { 0.0 };
            total += r * energies.eigenvalues[k] * (overlaps[[sj, k]].norm_sqr() - delta);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErgotropyMetadata {
    pub params: ModelParams,
    pub rc: RCParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErgotropyReport {
    pub t_grid: Vec<f64>,
    /// eV
    pub tls_ergotropy: Vec<f64>,
    /// eV
    pub es_ergotropy: Vec<f64>,
    /// `⟨σ_x(t)⟩` on the same grid.
    pub sigma_x: Vec<f64>,
    /// `2|ρ_eg(t)|`.
    pub coherence: Vec<f64>,
    pub metadata: ErgotropyMetadata,
}

/// TLS ergotropy against the bare `H_S` and extended-system ergotropy
/// against `H_ES` along the χ = 0 trajectory.
pub fn ergotropy_series(model: &HcRcme, t_grid: &[f64]) -> Result<ErgotropyReport> {
    let es = model.extended_system();
    let h_s = &es.h_s;
    let tls_energies = hermitian_eig(h_s)?;
    let mut report = ErgotropyReport {
        t_grid: t_grid.to_vec(),
        tls_ergotropy: Vec::with_capacity(t_grid.len()),
        es_ergotropy: Vec::with_capacity(t_grid.len()),
        sigma_x: Vec::with_capacity(t_grid.len()),
        coherence: Vec::with_capacity(t_grid.len()),
        metadata: ErgotropyMetadata {
            params: *model.params(),
            rc: *model.rc(),
        },
    };
    model.dynamics_chi0_each(t_grid, |s| {
        report.tls_ergotropy.push(ergotropy_in(&s.rho_s, h_s, &tls_energies)?);
        report.es_ergotropy.push(ergotropy_in(&s.rho_es, &es.h_es, &es.spectral)?);
        report.sigma_x.push(s.sigma_x);
        report.coherence.push(s.coherence_magnitude());
        Ok(())
    })?;
    Ok(report)
}

pub fn ergotropy_series_for(
    p: &ModelParams,
    rc: &RCParams,
    rho_s0: &Operator,
    t_grid: &[f64],
) -> Result<ErgotropyReport> {
    ergotropy_series(&HcRcme::new(*p, *rc, rho_s0.clone())?, t_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::plus_state;
    use crate::linalg::{frobenius_norm, identity, kron, sigma_z};
    use crate::model::map_to_rc;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn tls_h() -> Operator {
        sigma_z() * c(1.0)
    }

    fn gibbs(h: &Operator, beta: f64) -> Operator {
        let e = hermitian_eig(h).unwrap();
        let w: Vec<f64> = e.eigenvalues.iter().map(|x| (-beta * x).exp()).collect();
        let z: f64 = w.iter().sum();
        let d = Operator::from_diag(&ndarray::Array1::from_iter(w.iter().map(|x| c(x / z))));
        e.eigenvectors.dot(&d).dot(&dagger(&e.eigenvectors))
    }

    fn random_state(n: usize, entries: &[f64]) -> Operator {
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            let k = 2 * (i * n + j);
            C64::new(entries[k % entries.len()], entries[(k + 1) % entries.len()])
        });
        let rho = a.dot(&dagger(&a));
        let t = trace(&rho);
        rho.mapv(|z| z / t)
    }

    fn random_hermitian(n: usize, entries: &[f64]) -> Operator {
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            let k = 2 * (i * n + j) + 7;
            C64::new(entries[k % entries.len()], entries[(k + 3) % entries.len()])
        });
        (&a + &dagger(&a)) * c(0.5)
    }

    fn pseudo(len: usize, seed: u64) -> Vec<f64> {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..len)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn two_level_values() {
        let h = tls_h();
        assert!((ergotropy(&plus_state(), &h).unwrap() - 1.0).abs() < 1e-12);
        let excited = ndarray::array![[c(1.0), c(0.0)], [c(0.0), c(0.0)]];
        assert!((ergotropy(&excited, &h).unwrap() - 2.0).abs() < 1e-12);
        let p = passive_state(&excited, &h).unwrap();
        assert!((p[[1, 1]] - c(1.0)).norm() < 1e-12 && p[[0, 0]].norm() < 1e-12);
    }

    #[test]
    fn gibbs_states_are_passive() {
        for (n, beta) in [(2, 0.3), (5, 2.0), (12, 38.7)] {
            let h = random_hermitian(n, &pseudo(4 * n * n, n as u64));
            let g = gibbs(&h, beta);
            assert!(ergotropy(&g, &h).unwrap().abs() < 1e-10);
            let p = passive_state(&g, &h).unwrap();
            assert!(frobenius_norm(&(&p - &g)) < 1e-10);
        }
    }

    #[test]
    fn passive_state_is_idempotent() {
        let h = random_hermitian(6, &pseudo(200, 1));
        let rho = random_state(6, &pseudo(200, 2));
        let p1 = passive_state(&rho, &h).unwrap();
        let p2 = passive_state(&p1, &h).unwrap();
        assert!(frobenius_norm(&(&p1 - &p2)) < 1e-10);
        assert!(ergotropy(&p1, &h).unwrap().abs() < 1e-10);
    }

    #[test]
    fn both_forms_agree_up_to_dim_40() {
        for n in [2, 3, 8, 20, 40] {
            let h = random_hermitian(n, &pseudo(4 * n * n + 11, 100 + n as u64));
            let rho = random_state(n, &pseudo(4 * n * n + 13, 200 + n as u64));
            let a = ergotropy(&rho, &h).unwrap();
            let b = ergotropy_double_sum(&rho, &h).unwrap();
            assert!((a - b).abs() < 1e-10, "n={n}: {a} vs {b}");
            assert!(a >= -1e-12);
        }
    }

    #[test]
    fn degenerate_ties_do_not_matter() {
        // degenerate energies and populations, in shuffled bases
        let energies = [0.0, 1.0, 1.0, 1.0, 2.0];
        let pops = [0.1, 0.3, 0.3, 0.2, 0.1];
        let reference = {
            let h = Operator::from_diag(&ndarray::Array1::from_iter(energies.iter().map(|&x| c(x))));
            let rho = Operator::from_diag(&ndarray::Array1::from_iter(pops.iter().map(|&x| c(x))));
            ergotropy(&rho, &h).unwrap()
        };
        for seed in 0..10u64 {
            let u = hermitian_eig(&random_hermitian(5, &pseudo(200, seed))).unwrap().eigenvectors;
            let w = hermitian_eig(&random_hermitian(5, &pseudo(200, seed + 50))).unwrap().eigenvectors;
            let h = u.dot(&Operator::from_diag(&ndarray::Array1::from_iter(energies.iter().map(|&x| c(x))))).dot(&dagger(&u));
            let rho = w.dot(&Operator::from_diag(&ndarray::Array1::from_iter(pops.iter().map(|&x| c(x))))).dot(&dagger(&w));
            let e = ergotropy(&rho, &h).unwrap();
            let passive_energy: f64 = 0.3 * 0.0 + 0.3 * 1.0 + 0.2 * 1.0 + 0.1 * 1.0 + 0.1 * 2.0;
            let expected = trace(&h.dot(&rho)).re - passive_energy;
            assert!((e - expected).abs() < 1e-10);
            assert!((ergotropy_double_sum(&rho, &h).unwrap() - e).abs() < 1e-10);
        }
        assert!(reference.is_finite());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(ergotropy(&plus_state(), &identity(3)).is_err());
        assert!(passive_state(&identity(2), &tls_h()).is_err());
    }

    #[test]
    fn series_at_time_zero() {
        let p = ModelParams { m_rc: 10, ..ModelParams::default() };
        let model = HcRcme::from_params(p).unwrap();
        let r = ergotropy_series(&model, &[0.0, 1.0]).unwrap();
        assert!((r.tls_ergotropy[0] - 1.0).abs() < 1e-9);
        assert!(r.es_ergotropy[0] > r.tls_ergotropy[0]);
        assert!((r.sigma_x[0] - 1.0).abs() < 1e-12);

        let rc = RCParams {
            lambda_rc: 1e-300,
            ..map_to_rc(&p).unwrap()
        };
        let r = ergotropy_series_for(&p, &rc, &plus_state(), &[0.0]).unwrap();
        assert!((r.es_ergotropy[0] - r.tls_ergotropy[0]).abs() < 1e-9);
    }

    #[test]
    fn product_with_gibbs_adds_nothing() {
        let h_rc = Operator::from_diag(&ndarray::Array1::from_iter((0..4).map(|n| c(0.05 * n as f64))));
        let h = kron(&tls_h(), &identity(4)) + kron(&identity(2), &h_rc);
        let rho = kron(&plus_state(), &gibbs(&h_rc, 38.68));
        assert!((ergotropy(&rho, &h).unwrap() - 1.0).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn ergotropy_is_nonnegative_and_forms_agree(n in 2usize..8, seed in 0u64..10_000) {
            let h = random_hermitian(n, &pseudo(4 * n * n + 5, seed));
            let rho = random_state(n, &pseudo(4 * n * n + 9, seed ^ 0xabcdef));
            let a = ergotropy(&rho, &h).unwrap();
            prop_assert!(a >= -1e-10);
            prop_assert!((a - ergotropy_double_sum(&rho, &h).unwrap()).abs() < 1e-10);
        }
    }
}
