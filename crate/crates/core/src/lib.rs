//! Heat full counting statistics for the spin-boson model from a reaction
//! coordinate master equation, with the exact independent-boson solution as
//! a reference.

pub mod analysis;
pub mod engine;
pub mod ergotropy;
pub mod error;
pub mod ibm;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod statistics;
pub mod tolerances;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
