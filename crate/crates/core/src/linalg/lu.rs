//! Blocked LU with partial pivoting. Trailing updates go through `dot` so
//! the O(n³) work runs at matrix-multiply speed.

use ndarray::{s, Array2, Axis};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use super::matmul;

const BLOCK: usize = 48;

/// Solution of `A X = B` and the ratio of the smallest to the largest
/// pivot magnitude.
pub(crate) struct LuSolve {
    pub x: Array2<C64>,
    pub pivot_ratio: f64,
}

fn swap_rows(m: &mut Array2<C64>, i: usize, j: usize) {
    if i == j {
        return;
    }
    let (mut a, mut b) = m.multi_slice_mut((s![i, ..], s![j, ..]));
    ndarray::Zip::from(&mut a).and(&mut b).for_each(std::mem::swap);
}

/// `row_dst -= factor · row_src` restricted to columns `cols`.
fn axpy_row(m: &mut Array2<C64>, dst: usize, src: usize, factor: C64, cols: std::ops::Range<usize>) {
    let (mut d, s_) = m.multi_slice_mut((s![dst, cols.clone()], s![src, cols]));
    ndarray::Zip::from(&mut d).and(&s_).for_each(|x, &y| *x -= factor * y);
}

pub(crate) fn lu_solve(mut a: Array2<C64>, mut b: Array2<C64>) -> Result<LuSolve> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.nrows(),
        });
    }
    let m = b.ncols();

    for k0 in (0..n).step_by(BLOCK) {
        let k1 = (k0 + BLOCK).min(n);
        for j in k0..k1 {
            let p = (j..n)
                .max_by(|&x, &y| a[[x, j]].norm().total_cmp(&a[[y, j]].norm()))
                .expect("non-empty range");
            if a[[p, j]].norm() == 0.0 {
                return Err(Error::Singular("LU pivot"));
            }
            swap_rows(&mut a, j, p);
            swap_rows(&mut b, j, p);
            let inv = a[[j, j]].inv();
            for i in j + 1..n {
                let l = a[[i, j]] * inv;
                a[[i, j]] = l;
                if l != C64::new(0.0, 0.0) {
                    axpy_row(&mut a, i, j, l, j + 1..k1);
                }
            }
        }
        if k1 < n {
            // U12 = L11⁻¹ A12
            for j in k0..k1 {
                for i in j + 1..k1 {
                    let l = a[[i, j]];
                    axpy_row(&mut a, i, j, l, k1..n);
                }
            }
            let l21 = a.slice(s![k1.., k0..k1]).to_owned();
            let u12 = a.slice(s![k0..k1, k1..]).to_owned();
            let update = matmul(&l21, &u12);
            let mut a22 = a.slice_mut(s![k1.., k1..]);
            a22 -= &update;
        }
    }

    // forward substitution with unit-lower L
    for k0 in (0..n).step_by(BLOCK) {
        let k1 = (k0 + BLOCK).min(n);
        for j in k0..k1 {
            for i in j + 1..k1 {
                let l = a[[i, j]];
                axpy_row(&mut b, i, j, l, 0..m);
            }
        }
        if k1 < n {
            let update = matmul(&a.slice(s![k1.., k0..k1]), &b.slice(s![k0..k1, ..]));
            let mut rest = b.slice_mut(s![k1.., ..]);
            rest -= &update;
        }
    }

    // back substitution with U
    let starts: Vec<usize> = (0..n).step_by(BLOCK).collect();
    for &k0 in starts.iter().rev() {
        let k1 = (k0 + BLOCK).min(n);
        for j in (k0..k1).rev() {
            let inv = a[[j, j]].inv();
            b.index_axis_mut(Axis(0), j).mapv_inplace(|z| z * inv);
            for i in k0..j {
                let u = a[[i, j]];
                axpy_row(&mut b, i, j, u, 0..m);
            }
        }
        if k0 > 0 {
            let update = matmul(&a.slice(s![..k0, k0..k1]), &b.slice(s![k0..k1, ..]));
            let mut rest = b.slice_mut(s![..k0, ..]);
            rest -= &update;
        }
    }

    let pivots: Vec<f64> = (0..n).map(|j| a[[j, j]].norm()).collect();
    let pmax = pivots.iter().copied().fold(0.0, f64::max);
    let pmin = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    if !b.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("LU solution"));
    }
    Ok(LuSolve {
        x: b,
        pivot_ratio: if n == 0 { 1.0 } else { pmin / pmax },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize, m: usize, seed: u64) -> Array2<C64> {
        let mut x = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut next = move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        Array2::from_shape_fn((n, m), |_| C64::new(next(), next()))
    }

    #[test]
    fn solves_across_block_boundaries() {
        for n in [1, 5, 47, 48, 49, 130] {
            let a = test_matrix(n, n, 1);
            let b = test_matrix(n, 3, 2);
            let sol = lu_solve(a.clone(), b.clone()).unwrap();
            let resid = &a.dot(&sol.x) - &b;
            let worst = resid.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(worst < 1e-10, "n={n}: {worst}");
            assert!(sol.pivot_ratio > 0.0);
        }
    }

    #[test]
    fn needs_pivoting() {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let a = ndarray::array![[o, l], [l, o]];
        let b = ndarray::array![[C64::new(2.0, 0.0)], [C64::new(3.0, 0.0)]];
        let sol = lu_solve(a, b).unwrap();
        assert_eq!(sol.x[[0, 0]], C64::new(3.0, 0.0));
        assert_eq!(sol.x[[1, 0]], C64::new(2.0, 0.0));
    }

    #[test]
    fn singular_is_rejected() {
        let a = Array2::from_elem((3, 3), C64::new(1.0, 0.0));
        let b = Array2::from_elem((3, 1), C64::new(1.0, 0.0));
        assert!(lu_solve(a, b).is_err());
    }
}
