//! Numerical laboratory for double-phase and variable-exponent
//! Musielak-Orlicz functionals.
//!
//! The crate implements mollification with squeezing over star-shaped
//! covers, the modular/Luxemburg machinery, convex conjugation of sampled
//! N-functions, and the experiments that measure `H(S^eps u) -> H(u)` and
//! probe for a Lavrentiev gap on discrete grids.
// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod modular;
pub mod nfunctions;
mod par;

pub use error::{Error, Result};
