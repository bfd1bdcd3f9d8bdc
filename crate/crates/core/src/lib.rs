//! Bernoulli decompositions of one-dimensional probability measures,
//! optimal-coupling gap quantities, and Sperner-type anti-concentration
//! bounds, with brute-force oracles for small instances.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antichain;
pub mod concentration;
pub mod coupling;
pub mod decomposition;
pub mod error;
pub mod lattice;
pub mod measure;
pub mod piecewise;

pub use error::{Error, Result};
pub use measure::{EmpiricalSample, ProbabilityMeasure, Sampler};
pub use piecewise::PiecewiseAffine;
