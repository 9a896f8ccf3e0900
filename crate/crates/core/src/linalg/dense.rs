//! Kernels behind the hot paths: complex products on real gemm and
//! eigenvalues of Hermitian matrices by tridiagonal reduction.

use ndarray::{Array1, Array2, ArrayBase, Data, Ix2, Zip};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Below this inner size the complex kernel is already cheap.
const SPLIT_MIN: usize = 32;

/// `a · b` from three real products (Gauss's trick). Real gemm runs at
/// several times the complex kernel's rate here.
pub(crate) fn matmul<S1, S2>(a: &ArrayBase<S1, Ix2>, b: &ArrayBase<S2, Ix2>) -> Array2<C64>
where
    S1: Data<Elem = C64>,
    S2: Data<Elem = C64>,
{
    let (m, k) = a.dim();
    let n = b.ncols();
    if m.min(n).min(k) < SPLIT_MIN {
        return a.dot(b);
    }
    let (ar, ai) = (a.mapv(|z| z.re), a.mapv(|z| z.im));
    let (br, bi) = (b.mapv(|z| z.re), b.mapv(|z| z.im));
    // three real products instead of four
    let t1 = ar.dot(&br);
    let t2 = ai.dot(&bi);
    let t3 = (&ar + &ai).dot(&(&br + &bi));
    Zip::from(&t1).and(&t2).and(&t3).map_collect(|&p, &q, &r| C64::new(p - q, r - p - q))
}

/// Householder reduction of a Hermitian matrix to real symmetric
/// tridiagonal form. Returns the diagonal and the moduli of the
/// subdiagonal; phases drop out of the spectrum.
fn tridiagonalize(mut a: Array2<C64>) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let x: Vec<C64> = (0..m).map(|i| a[[k + 1 + i, k]]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        d[k] = a[[k, k]].re;
        e[k] = norm;
        if norm == 0.0 || m == 1 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        // v = x + phase·‖x‖·e₁ maps x onto −phase·‖x‖·e₁
        let mut v = x;
        v[0] += phase * norm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A ← H A H with H = I − 2vv†, on the trailing block
        let p: Vec<C64> = (0..m)
            .map(|i| (0..m).map(|j| a[[k + 1 + i, k + 1 + j]] * v[j]).sum())
            .collect();
        let kappa: f64 = v.iter().zip(&p).map(|(vi, pi)| (vi.conj() * pi).re).sum();
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kappa).collect();
        for i in 0..m {
            for j in 0..m {
                a[[k + 1 + i, k + 1 + j]] -= 2.0 * (v[i] * w[j].conj() + w[i] * v[j].conj());
            }
        }
    }
    if n > 0 {
        d[n - 1] = a[[n - 1, n - 1]].re;
    }
    (d, e)
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal
/// matrix (`e[i]` couples `i` and `i + 1`). Eigenvalues overwrite `d`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::ContractViolation("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Ascending eigenvalues of an exactly Hermitian matrix.
pub(crate) fn hermitian_spectrum(a: Array2<C64>) -> Result<Array1<f64>> {
    let (mut d, mut e) = tridiagonalize(a);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(Array1::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(n: usize, m: usize, seed: u64) -> Array2<C64> {
        let mut x = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut next = move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        Array2::from_shape_fn((n, m), |_| C64::new(next(), next()))
    }

    #[test]
    fn split_product_matches_complex_kernel() {
        for (m, k, n) in [(40, 33, 50), (64, 64, 3), (5, 80, 80)] {
            let a = lcg_matrix(m, k, 1);
            let b = lcg_matrix(k, n, 2);
            let diff = &matmul(&a, &b) - &a.dot(&b);
            let worst = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(worst < 1e-12, "{worst}");
        }
    }

    #[test]
    fn spectrum_matches_trace_invariants() {
        for n in [1, 2, 3, 17, 60] {
            let g = lcg_matrix(n, n, n as u64);
            let h = (&g + &g.t().mapv(|z| z.conj())) * C64::new(0.5, 0.0);
            let ev = hermitian_spectrum(h.clone()).unwrap();
            let tr: f64 = (0..n).map(|i| h[[i, i]].re).sum();
            let tr2: f64 = h.iter().map(|z| z.norm_sqr()).sum();
            assert!((ev.sum() - tr).abs() < 1e-12 * n as f64);
            assert!((ev.mapv(|x| x * x).sum() - tr2).abs() < 1e-11 * tr2.max(1.0));
            assert!(ev.windows(2).into_iter().all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn spectrum_of_structured_matrices() {
        let diag = Array2::from_diag(&Array1::from(vec![3.0, -1.0, 2.0, 2.0]).mapv(|x| C64::new(x, 0.0)));
        assert_eq!(hermitian_spectrum(diag).unwrap().to_vec(), vec![-1.0, 2.0, 2.0, 3.0]);
        // σ_y has eigenvalues ±1
        let sy = ndarray::array![[C64::new(0.0, 0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]];
        let ev = hermitian_spectrum(sy).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
        assert!(hermitian_spectrum(Array2::zeros((0, 0))).unwrap().is_empty());
    }
}
