//! Numerical laboratory for the nested algebraic Bethe ansatz of `U_q(gl_N)`
//! on inhomogeneous fundamental chains with a diagonal twist.
//!
//! On these evaluation modules the positive and negative L-operators are one
//! and the same rational operator-valued function, so the total currents
//! `F_i(t) = F_i^+(t) - F_i^-(t)` vanish pointwise. Statements about currents
//! are therefore tested only through their scalar shadows.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod context;
pub mod error;
pub mod gauss;
pub mod kernels;
pub mod operator;
pub mod params;
pub mod qsym;
pub mod rational;
pub mod rep;
pub mod solver;
pub mod vectors;

pub use context::DeformationContext;
pub use error::{Error, Result};
pub use params::BetheParameterSet;
pub use rational::RationalFunction;
