//! Numerical tolerances used across the crate.
//!
//! Every threshold that decides correctness (Hermiticity checks, gap
//! classification, quadrature targets, propagation accuracy) lives here so it
//! can be audited in one place.

/// Relative Frobenius tolerance for accepting an operator as Hermitian.
pub const HERMITICITY_REL: f64 = 1e-10;

/// Tolerance on `|tr ρ - 1|` when validating an input density matrix.
pub const STATE_TRACE: f64 = 1e-10;

/// Energy gaps `|λ_m - λ_n|` below this value (eV) are treated as degenerate.
pub const ZERO_GAP_EV: f64 = 1e-9;

/// Target relative accuracy of `propagate` in the vector 2-norm.
pub const PROPAGATION_REL: f64 = 1e-8;

/// Largest single step (ps) used when precomputing one-step propagators.
pub const MAX_STEP_PS: f64 = 10.0;

/// Two time gaps closer than this (ps) share a cached one-step propagator.
pub const STEP_KEY_PS: f64 = 1e-12;

/// Pivot ratio of the Padé denominator below which results are flagged as
/// possibly inaccurate.
pub const PADE_PIVOT_RATIO: f64 = 1e-12;

/// Default quadrature relative tolerance.
pub const QUAD_REL: f64 = 1e-8;

/// Default quadrature absolute tolerance.
pub const QUAD_ABS: f64 = 1e-12;

/// Default cap on adaptive subdivisions.
pub const QUAD_MAX_SUBDIVISIONS: usize = 20_000;

/// Truncation adequacy: thermal occupation of the highest retained RC level
/// must stay below this.
pub const TRUNCATION_OCCUPATION: f64 = 1e-6;

/// Counting parameter used for finite-difference moments (eV⁻¹).
pub const DEFAULT_CHI_EPS: f64 = 0.005;
