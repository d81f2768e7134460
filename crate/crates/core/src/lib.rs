//! Planar p-harmonic functions with a prescribed critical point, built from
//! their hodographic power series, and numerical checks of the asymptotic
//! mean value property they satisfy.

// `!(x > 0.0)` style guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amvp;
pub mod crosscheck;
pub mod decay;
pub mod error;
pub mod harness;
pub mod hodograph;
pub mod inequalities;
pub mod pharmonic;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
