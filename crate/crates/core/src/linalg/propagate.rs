//! Exact propagation `v(t) = exp(L t) v₀` for a constant generator.
//!
//! The generator is split into exactly decoupled blocks (connected components
//! of its nonzero pattern). For every distinct gap between requested times a
//! one-step propagator `exp(L h)` is computed once per block by Padé scaling
//! and squaring and then applied repeatedly. Gaps longer than
//! [`tolerances::MAX_STEP_PS`] are covered by whole unit steps plus a
//! remainder step. Blocks on which every initial vector vanishes stay zero
//! and are skipped.

use std::collections::HashMap;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::{coupled_blocks, expm, SuperOperator};
use crate::error::{Error, Result};
use crate::tolerances;

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    generator: Array2<C64>,
}

/// Reusable propagator for one generator.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    blocks: Vec<Block>,
    steps: HashMap<i64, Vec<Option<Array2<C64>>>>,
    ill_conditioned: bool,
}

/// Sampled trajectory returned by [`propagate`].
#[derive(Debug, Clone)]
pub struct Propagation {
    pub times: Vec<f64>,
    pub states: Vec<Array1<C64>>,
    /// Set when a Padé solve was close to singular; results may miss the
    /// requested tolerance.
    pub conditioning_warning: bool,
}

fn validate_times(times: &[f64]) -> Result<()> {
    if let Some(&t0) = times.first() {
        if !(t0 >= 0.0) {
            return Err(Error::InvalidGrid(format!("first time {t0} is negative")));
        }
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("non-finite time".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid("times must be ascending".into()));
    }
    Ok(())
}

/// Splits a gap into `(unit_steps, remainder)`.
fn split_gap(gap: f64) -> (u64, f64) {
    let unit = tolerances::MAX_STEP_PS;
    if gap <= unit * (1.0 + 1e-12) {
        return (0, gap);
    }
    let whole = (gap / unit * (1.0 + 1e-12)).floor();
    let rem = gap - whole * unit;
    if rem.abs() <= tolerances::STEP_KEY_PS * gap.max(1.0) {
        (whole as u64, 0.0)
    } else {
        (whole as u64, rem)
    }
}

impl Propagator {
    pub fn new(generator: &SuperOperator) -> Result<Self> {
        Self::from_matrix(generator.matrix())
    }

    pub fn from_matrix(generator: &Array2<C64>) -> Result<Self> {
        if !generator.is_square() {
            return Err(Error::ContractViolation("generator must be square".into()));
        }
        if generator.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("generator"));
        }
        let blocks = coupled_blocks(generator)
            .into_iter()
            .map(|indices| {
                let generator = Array2::from_shape_fn((indices.len(), indices.len()), |(i, j)| {
                    generator[[indices[i], indices[j]]]
                });
                Block { indices, generator }
            })
            .collect();
        Ok(Self {
            dim: generator.nrows(),
            blocks,
            steps: HashMap::new(),
            ill_conditioned: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index sets of the decoupled blocks.
    pub fn block_indices(&self) -> impl Iterator<Item = &[usize]> {
        self.blocks.iter().map(|b| b.indices.as_slice())
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.indices.len()).collect()
    }

    pub fn conditioning_warning(&self) -> bool {
        self.ill_conditioned
    }

    fn step_key(h: f64) -> i64 {
        (h / tolerances::STEP_KEY_PS).round() as i64
    }

    fn ensure_step(&mut self, h: f64, active: &[bool]) -> Result<i64> {
        let key = Self::step_key(h);
        let mats = self
            .steps
            .entry(key)
            .or_insert_with(|| vec![None; self.blocks.len()]);
        for ((block, slot), &on) in self.blocks.iter().zip(mats.iter_mut()).zip(active) {
            if on && slot.is_none() {
                let e = expm(&block.generator.mapv(|z| z * h))?;
                self.ill_conditioned |= e.ill_conditioned;
                *slot = Some(e.matrix);
            }
        }
        Ok(key)
    }

    /// Applies the cached step `count` times. Each block is gathered once
    /// and stepped by plain row-major matvecs, which stream the matrix
    /// without the packing a gemm call would redo on every step.
    fn apply_steps(&self, key: i64, count: u64, states: &mut [Array1<C64>]) {
        let mats = &self.steps[&key];
        for (block, m) in self.blocks.iter().zip(mats) {
            let Some(m) = m else { continue };
            let n = block.indices.len();
            let mut cur: Vec<Vec<C64>> = states
                .iter()
                .map(|v| block.indices.iter().map(|&i| v[i]).collect())
                .collect();
            let mut next = vec![vec![C64::new(0.0, 0.0); n]; states.len()];
            for _ in 0..count {
                for (r, row) in m.outer_iter().enumerate() {
                    let row = row.to_slice().expect("step matrices are standard layout");
                    for (x, y) in cur.iter().zip(next.iter_mut()) {
                        y[r] = dot(row, x);
                    }
                }
                std::mem::swap(&mut cur, &mut next);
            }
            for (v, x) in states.iter_mut().zip(&cur) {
                for (&i, &z) in block.indices.iter().zip(x) {
                    v[i] = z;
                }
            }
        }
    }

    /// Evolves several initial vectors together, calling `visit(k, t_k,
    /// states)` at every requested time.
    pub fn evolve_each<F>(&mut self, initial: &[Array1<C64>], times: &[f64], mut visit: F) -> Result<()>
    where
        F: FnMut(usize, f64, &[Array1<C64>]) -> Result<()>,
    {
        validate_times(times)?;
        if let Some(v) = initial.iter().find(|v| v.len() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let mut states: Vec<Array1<C64>> = initial.to_vec();
        let active: Vec<bool> = self
            .blocks
            .iter()
            .map(|b| {
                states
                    .iter()
                    .any(|v| b.indices.iter().any(|&i| v[i] != C64::new(0.0, 0.0)))
            })
            .collect();
        let mut now = 0.0;
        for (k, &t) in times.iter().enumerate() {
            let gap = t - now;
            if gap > tolerances::STEP_KEY_PS {
                let (whole, rem) = split_gap(gap);
                if whole > 0 {
                    let key = self.ensure_step(tolerances::MAX_STEP_PS, &active)?;
                    self.apply_steps(key, whole, &mut states);
                }
                if rem > 0.0 {
                    let key = self.ensure_step(rem, &active)?;
                    self.apply_steps(key, 1, &mut states);
                }
                if states
                    .iter()
                    .any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()))
                {
                    return Err(Error::NonFinite("propagated state"));
                }
                now = t;
            }
            visit(k, t, &states)?;
        }
        Ok(())
    }

    pub fn evolve(&mut self, v0: &Array1<C64>, times: &[f64]) -> Result<Propagation> {
        let mut out = Vec::with_capacity(times.len());
        self.evolve_each(std::slice::from_ref(v0), times, |_, _, s| {
            out.push(s[0].clone());
            Ok(())
        })?;
        Ok(Propagation {
            times: times.to_vec(),
            states: out,
            conditioning_warning: self.ill_conditioned,
        })
    }
}

/// Unconjugated `Σ a_j b_j` over four independent lanes so the loop
/// pipelines.
fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ta, tb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            re[l] += x[l].re * y[l].re - x[l].im * y[l].im;
            im[l] += x[l].re * y[l].im + x[l].im * y[l].re;
        }
    }
    let mut acc = C64::new(re.iter().sum(), im.iter().sum());
    for (x, y) in ta.iter().zip(tb) {
        acc += x * y;
    }
    acc
}

/// `exp(L t_k) v₀` for each requested time.
pub fn propagate(generator: &SuperOperator, v0: &Array1<C64>, times: &[f64]) -> Result<Propagation> {
    Propagator::new(generator)?.evolve(v0, times)
}
