//! Constrained interpolation on finite subsets of the unit disc.
//!
//! Builds the Malmquist basis of the model space `K_B`, the linear
//! interpolation operator onto it, exact Nevanlinna–Pick and
//! Carathéodory–Schur solvers, and estimators for the interpolation
//! constant `c(σ, X, H∞)` over Hardy, weighted-sequence and Bergman scales.

// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod discfun;
pub mod error;
pub mod extremal;
pub mod linalg;
pub mod modelspace;
pub mod search;
pub mod spaces;

pub use error::{Error, Result};
