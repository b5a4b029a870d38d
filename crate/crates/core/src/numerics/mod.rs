//! Dense real-matrix kernel.
//!
//! Row-major storage throughout; the graphs handled here are small enough
//! that sparse kernels would only add indirection. All operations are pure
//! functions of their inputs.

mod adam;
pub(crate) mod finite_diff;
pub(crate) mod matrix;
mod svd;

pub use adam::{adam_step, AdamState};
pub use finite_diff::{finite_diff_gradient, gradient_rel_err};
pub use matrix::{activate, sigmoid, Activation, Matrix};
pub use svd::{pseudoinverse, svd, sym_eig, DEFAULT_PINV_TOL};
