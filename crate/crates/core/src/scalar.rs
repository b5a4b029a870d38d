//! Scalar abstraction for the dense kernels.
//!
//! Everything numeric in this crate is written against [`Scalar`] so the
//! same code runs in `f32` and `f64`. Random sampling and file parsing go
//! through `f64` and convert, which keeps the random streams identical
//! across scalar types for a fixed seed.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, NumAssign};

pub trait Scalar:
    Float + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;

    /// Constants used by clamped logarithms.
    fn prob_eps() -> Self {
        Self::from_f64(1e-12)
    }
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
}
