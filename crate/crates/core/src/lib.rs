//! Skew products `F(b, x) = (A b, f_b(x))` over the hyperbolic toral
//! automorphism `A = ((m, m+1), (m−1, m))` with fiber maps on the unit disk.

// Guards are written `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod torus;

pub use error::{Error, Result};
pub mod analysis;
pub mod fiber;
pub mod rng;
pub mod skew;
pub mod verify;
