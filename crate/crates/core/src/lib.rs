//! Cross-network learning with partially aligned graph convolutional networks.
//!
//! The crate trains two-layer GCNs on multiple graphs that share a (small)
//! set of aligned nodes, transferring knowledge between them through
//! parameter sharing, representation-space regularization, and alignment
//! reconstruction. It also machine-checks the closed-form optima and
//! capacity arguments that justify those mechanisms, at desk scale.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! concrete `f64` aliases below are what the CLI and experiment drivers use.

pub mod checkpoint;
pub mod config_file;
pub mod crossnet;
pub mod error;
pub mod eval;
pub mod gcn;
pub mod graph;
pub mod numerics;
pub mod relational;
pub mod rng;
pub mod scalar;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dense matrix over the default scalar.
pub type Mat = numerics::Matrix<f64>;
/// Graph over the default scalar.
pub type Graph64 = graph::Graph<f64>;
/// Relational graph over the default scalar.
pub type RelationalGraph64 = graph::RelationalGraph<f64>;
