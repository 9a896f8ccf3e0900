//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (degrees 3, 5, 7, 9, 13), following Higham's 2005 scheme.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::lu::lu_solve;
use super::matmul;
use crate::error::{Error, Result};
use crate::tolerances;

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Result of [`expm`].
#[derive(Debug, Clone)]
pub struct Expm {
    pub matrix: Array2<C64>,
    /// Set when the Padé denominator was close to singular.
    pub ill_conditioned: bool,
    pub squarings: u32,
}

fn one_norm(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn axpy_eye(acc: &mut Array2<C64>, s: f64) {
    for i in 0..acc.nrows() {
        acc[[i, i]] += s;
    }
}

fn scaled(a: &Array2<C64>, s: f64) -> Array2<C64> {
    a.mapv(|z| z * s)
}

/// Low-degree approximant: returns (U, V) with r = (V - U)⁻¹ (V + U).
fn pade_low(a: &Array2<C64>, b: &[f64]) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let a2 = matmul(a, a);
    let mut powers = vec![Array2::<C64>::eye(n), a2.clone()];
    while powers.len() < b.len() / 2 {
        let next = matmul(powers.last().unwrap(), &a2);
        powers.push(next);
    }
    let mut u_inner = Array2::<C64>::zeros((n, n));
    let mut v = Array2::<C64>::zeros((n, n));
    for (k, p) in powers.iter().enumerate() {
        u_inner.scaled_add(C64::new(b[2 * k + 1], 0.0), p);
        v.scaled_add(C64::new(b[2 * k], 0.0), p);
    }
    (matmul(a, &u_inner), v)
}

fn pade13(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let b = &B13;
    let a2 = matmul(a, a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);

    let mut u_hi = scaled(&a6, b[13]);
    u_hi.scaled_add(C64::new(b[11], 0.0), &a4);
    u_hi.scaled_add(C64::new(b[9], 0.0), &a2);
    let mut u_inner = matmul(&a6, &u_hi);
    u_inner.scaled_add(C64::new(b[7], 0.0), &a6);
    u_inner.scaled_add(C64::new(b[5], 0.0), &a4);
    u_inner.scaled_add(C64::new(b[3], 0.0), &a2);
    axpy_eye(&mut u_inner, b[1]);
    let u = matmul(a, &u_inner);

    let mut v_hi = scaled(&a6, b[12]);
    v_hi.scaled_add(C64::new(b[10], 0.0), &a4);
    v_hi.scaled_add(C64::new(b[8], 0.0), &a2);
    let mut v = matmul(&a6, &v_hi);
    v.scaled_add(C64::new(b[6], 0.0), &a6);
    v.scaled_add(C64::new(b[4], 0.0), &a4);
    v.scaled_add(C64::new(b[2], 0.0), &a2);
    axpy_eye(&mut v, b[0]);
    (u, v)
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &Array2<C64>) -> Result<Expm> {
    if !a.is_square() {
        return Err(Error::ContractViolation("expm needs a square matrix".into()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("expm input"));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Expm {
            matrix: Array2::zeros((0, 0)),
            ill_conditioned: false,
            squarings: 0,
        });
    }
    let norm = one_norm(a);
    let mut squarings = 0u32;
    let (u, v) = match THETA.iter().find(|(_, theta)| norm <= *theta) {
        Some(&(3, _)) => pade_low(a, &B3),
        Some(&(5, _)) => pade_low(a, &B5),
        Some(&(7, _)) => pade_low(a, &B7),
        Some(&(9, _)) => pade_low(a, &B9),
        _ => {
            let theta13 = THETA[4].1;
            if norm > theta13 {
                squarings = (norm / theta13).log2().ceil().max(0.0) as u32;
            }
            let scaled_a = scaled(a, 0.5f64.powi(squarings as i32));
            pade13(&scaled_a)
        }
    };

    let sol = lu_solve(&v - &u, &v + &u)?;
    let ill_conditioned = sol.pivot_ratio < tolerances::PADE_PIVOT_RATIO;
    let mut result = sol.x;
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    if result.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("expm result"));
    }
    Ok(Expm {
        matrix: result,
        ill_conditioned,
        squarings,
    })
}
