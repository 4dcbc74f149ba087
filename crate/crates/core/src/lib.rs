//! Numerical laboratory for one-dimensional free-boundary predator-prey
//! systems.

// Negated comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod model;
pub mod parallel;
pub mod solver;
pub mod stationary;
pub mod verify;

pub use error::{Error, Result};
