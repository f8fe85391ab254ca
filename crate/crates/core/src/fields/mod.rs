//! Grid-sampled scalar and vector fields with zero extension, finite
//! difference gradients, truncation, norms, and mollification kernels.

mod field;
mod fixture;
mod grid;
mod mollifier;

pub(crate) use field::interpolate_values;
pub(crate) use mollifier::kernel_quadrature;

pub use field::{
    gradient, gradient_magnitude, interpolate, lp_norm, sample, sup_norm, truncate, GridDomain,
    ScalarField, VectorField,
};
pub use fixture::FieldFixture;
pub use grid::{Centering, Grid};
pub use mollifier::{convolve, mollifier_dual_norms, DualNorms, Mollifier};
