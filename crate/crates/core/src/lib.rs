//! Hip fracture risk toolkit.
//!
//! A voxel finite-element surrogate produces yield load, ultimate load and
//! energy-to-failure for four loading conditions; the statistics side turns
//! the nine fracture-associated parameters into a PCA risk index (PC1),
//! compares classifiers under stratified cross-validation and resampling,
//! and benchmarks the resulting scores against an external FRAX column.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classifiers;
pub mod cli;
pub mod datamodel;
pub mod error;
pub mod eval;
pub mod femodel;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
