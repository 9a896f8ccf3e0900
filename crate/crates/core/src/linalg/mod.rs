//! Dense complex linear algebra on truncated Hilbert spaces.
//!
//! Operators are plain `Array2<Complex64>`. Superoperators act on
//! column-stacked vectorizations, so that `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

mod dense;
mod expm;
mod lu;
mod propagate;

pub use expm::{expm, Expm};
pub use propagate::{propagate, Propagation, Propagator};

pub(crate) use dense::matmul;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tolerances;

/// Dense operator on a finite Hilbert space.
pub type Operator = Array2<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub fn identity(dim: usize) -> Operator {
    Array2::eye(dim)
}

pub fn sigma_x() -> Operator {
    ndarray::array![[ZERO, ONE], [ONE, ZERO]]
}

pub fn sigma_y() -> Operator {
    ndarray::array![[ZERO, -I], [I, ZERO]]
}

/// Pauli z in the `{|e⟩, |g⟩}` ordering, so `|e⟩` carries eigenvalue +1.
pub fn sigma_z() -> Operator {
    ndarray::array![[ONE, ZERO], [ZERO, -ONE]]
}

pub fn dagger(a: &Operator) -> Operator {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &Operator) -> C64 {
    a.diag().sum()
}

pub fn frobenius_norm(a: &Operator) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖A - A†‖_F / ‖A‖_F`, zero for the zero matrix.
pub fn hermiticity_defect(a: &Operator) -> f64 {
    let norm = frobenius_norm(a);
    if norm == 0.0 {
        return 0.0;
    }
    frobenius_norm(&(a - &dagger(a))) / norm
}

pub fn is_hermitian(a: &Operator, rel_tol: f64) -> bool {
    a.is_square() && hermiticity_defect(a) <= rel_tol
}

/// Truncated bosonic annihilation operator with `⟨n-1|a|n⟩ = √n`.
pub fn boson_annihilation(m: usize) -> Result<Operator> {
    if m < 2 {
        return Err(Error::InvalidDimension(format!(
            "Fock truncation must be at least 2, got {m}"
        )));
    }
    let mut a = Array2::zeros((m, m));
    for n in 1..m {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// `a† a` with the same truncation.
pub fn number_operator(m: usize) -> Result<Operator> {
    boson_annihilation(m)?;
    let mut n_op = Array2::zeros((m, m));
    for n in 0..m {
        n_op[[n, n]] = C64::new(n as f64, 0.0);
    }
    Ok(n_op)
}

/// Kronecker product, `(A ⊗ B)[(i·dB + k), (j·dB + l)] = A[i,j] B[k,l]`.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for ((i, j), &aij) in a.indexed_iter() {
        if aij == ZERO {
            continue;
        }
        let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
        block.zip_mut_with(b, |o, &bkl| *o = aij * bkl);
    }
    out
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Array1<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Array2<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> Operator {
        let v = &self.eigenvectors;
        let scaled = v * &self.eigenvalues.mapv(|x| C64::new(x, 0.0));
        scaled.dot(&dagger(v))
    }

    /// `V† X V`.
    pub fn to_eigenbasis(&self, x: &Operator) -> Operator {
        dagger(&self.eigenvectors).dot(x).dot(&self.eigenvectors)
    }

    /// `V X V†`.
    pub fn from_eigenbasis(&self, x: &Operator) -> Operator {
        self.eigenvectors.dot(x).dot(&dagger(&self.eigenvectors))
    }
}

/// Connected components of the graph with an edge wherever `a[i,j] != 0`.
///
/// Components are returned ordered by their smallest index, each sorted.
pub(crate) fn coupled_blocks(a: &Array2<C64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for ((i, j), z) in a.indexed_iter() {
        if i != j && *z != ZERO {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                parent[hi] = lo;
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}


/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Exactly decoupled invariant subspaces are diagonalized separately, so
/// eigenvectors of block-diagonal inputs carry exact zeros off their block.
/// Cyclic Jacobi diagonalization of a Hermitian matrix. On return `h` is
/// diagonal and the returned columns are the eigenvectors.
fn jacobi_eig(h: &mut Array2<C64>) -> Array2<C64> {
    let n = h.nrows();
    let mut v = identity(n);
    let scale = frobenius_norm(h);
    if scale == 0.0 {
        return v;
    }
    for _sweep in 0..100 {
        let off: f64 = h
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let hpq = h[[p, q]];
                let mag = hpq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on columns (p, q)
                let phase = hpq / mag;
                let tau = (h[[q, q]].re - h[[p, p]].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -s * phase.conj();
                let jqq = c * phase.conj();
                for k in 0..n {
                    let (a, b) = (h[[k, p]], h[[k, q]]);
                    h[[k, p]] = a * jpp + b * jqp;
                    h[[k, q]] = a * jpq + b * jqq;
                    let (a, b) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = a * jpp + b * jqp;
                    v[[k, q]] = a * jpq + b * jqq;
                }
                for k in 0..n {
                    let (a, b) = (h[[p, k]], h[[q, k]]);
                    h[[p, k]] = jpp.conj() * a + jqp.conj() * b;
                    h[[q, k]] = jpq.conj() * a + jqq.conj() * b;
                }
                h[[p, q]] = ZERO;
                h[[q, p]] = ZERO;
                h[[p, p]] = C64::new(h[[p, p]].re, 0.0);
                h[[q, q]] = C64::new(h[[q, q]].re, 0.0);
            }
        }
    }
    v
}

fn check_hermitian(h: &Operator) -> Result<()> {
    if !h.is_square() {
        return Err(Error::ContractViolation("Hermitian eigensolver needs a square matrix".into()));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("Hermitian eigensolver input"));
    }
    let defect = hermiticity_defect(h);
    if defect > tolerances::HERMITICITY_REL {
        return Err(Error::ContractViolation(format!(
            "matrix is not Hermitian (relative defect {defect:e})"
        )));
    }
    Ok(())
}

/// Ascending eigenvalues only, by Householder tridiagonalization and
/// implicit QL. Much cheaper than [`hermitian_eig`] when vectors are not
/// needed.
pub fn hermitian_eigenvalues(h: &Operator) -> Result<Array1<f64>> {
    check_hermitian(h)?;
    let sym = (h + &dagger(h)) * C64::new(0.5, 0.0);
    dense::hermitian_spectrum(sym)
}

pub fn hermitian_eig(h: &Operator) -> Result<SpectralDecomposition> {
    check_hermitian(h)?;
    let n = h.nrows();
    let mut pairs: Vec<(f64, Array1<C64>)> = Vec::with_capacity(n);
    for block in coupled_blocks(h) {
        let mut sub = Array2::from_shape_fn((block.len(), block.len()), |(i, j)| {
            // average with the adjoint so the solver sees an exactly Hermitian matrix
            (h[[block[i], block[j]]] + h[[block[j], block[i]]].conj()) * 0.5
        });
        let vecs = jacobi_eig(&mut sub);
        for k in 0..block.len() {
            let val = sub[[k, k]].re;
            let mut v = Array1::zeros(n);
            for (r, &row) in block.iter().enumerate() {
                v[row] = vecs[[r, k]];
            }
            pairs.push((val, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut eigenvalues = Array1::zeros(n);
    let mut eigenvectors = Array2::zeros((n, n));
    for (k, (val, v)) in pairs.into_iter().enumerate() {
        eigenvalues[k] = val;
        eigenvectors.column_mut(k).assign(&v);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Column-stacking vectorization: `vec(ρ)[j·d + i] = ρ[i,j]`.
pub fn vectorize(rho: &Operator) -> Array1<C64> {
    let (r, c) = rho.dim();
    let mut v = Array1::zeros(r * c);
    for ((i, j), &z) in rho.indexed_iter() {
        v[j * r + i] = z;
    }
    v
}

pub fn devectorize(v: &Array1<C64>) -> Result<Operator> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::InvalidDimension(format!(
            "vector length {} is not a perfect square",
            v.len()
        )));
    }
    Ok(Array2::from_shape_fn((d, d), |(i, j)| v[j * d + i]))
}

/// Trace of the operator whose column-stacked vectorization is `v`.
pub fn vec_trace(v: &Array1<C64>, d: usize) -> C64 {
    (0..d).map(|i| v[i * d + i]).sum()
}

/// Linear map on vectorized operators of Hilbert dimension `dim`.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    dim: usize,
    matrix: Array2<C64>,
}

impl SuperOperator {
    pub fn from_matrix(dim: usize, matrix: Array2<C64>) -> Result<Self> {
        if matrix.dim() != (dim * dim, dim * dim) {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            matrix: Array2::zeros((dim * dim, dim * dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: Array2::eye(dim * dim),
        }
    }

    /// Hilbert-space dimension `d` (the matrix is `d² × d²`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.dim() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.nrows(),
            });
        }
        devectorize(&self.matrix.dot(&vectorize(rho)))
    }

    pub fn compose(&self, other: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            matrix: self.matrix.dot(&other.matrix),
        }
    }

    /// `self += scale · (Bᵀ ⊗ A)`, i.e. adds `X ↦ scale · A X B`.
    pub fn add_sandwich(&mut self, scale: C64, a: &Operator, b: &Operator) {
        let d = self.dim;
        for ((q, p), &bqp) in b.indexed_iter() {
            let w = scale * bqp;
            if w == ZERO {
                continue;
            }
            // (Bᵀ)[p,q] = B[q,p] multiplies block (p, q)
            let mut block = self.matrix.slice_mut(ndarray::s![p * d..(p + 1) * d, q * d..(q + 1) * d]);
            block.zip_mut_with(a, |o, &aik| *o += w * aik);
        }
    }

    pub fn scale(&mut self, s: C64) {
        self.matrix.mapv_inplace(|z| z * s);
    }
}

impl std::ops::Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

/// `X ↦ A X`, i.e. `I ⊗ A`.
pub fn left_mult(a: &Operator) -> SuperOperator {
    let d = a.nrows();
    let mut s = SuperOperator::zeros(d);
    s.add_sandwich(ONE, a, &identity(d));
    s
}

/// `X ↦ X B`, i.e. `Bᵀ ⊗ I`.
pub fn right_mult(b: &Operator) -> SuperOperator {
    let d = b.nrows();
    let mut s = SuperOperator::zeros(d);
    s.add_sandwich(ONE, &identity(d), b);
    s
}

/// Trace over the reaction coordinate of an operator on `TLS ⊗ RC`.
pub fn partial_trace_rc(rho_es: &Operator, dim_tls: usize, dim_rc: usize) -> Result<Operator> {
    let d = dim_tls * dim_rc;
    if rho_es.dim() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho_es.nrows(),
        });
    }
    Ok(Array2::from_shape_fn((dim_tls, dim_tls), |(i, j)| {
        (0..dim_rc)
            .map(|n| rho_es[[i * dim_rc + n, j * dim_rc + n]])
            .sum()
    }))
}
