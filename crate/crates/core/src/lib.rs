//! Information-geometric sequential testing in curved exponential families.
//!
//! The crate covers third-order power-loss theory for `k = (k₁, k₂)`-tests,
//! the geometry of the von Mises–Fisher and hyperboloid models, exact samplers,
//! nonsequential and sequential test procedures, and a Monte Carlo harness.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod inference;
pub mod numeric;
pub mod power;
pub mod sampling;

pub use error::{Error, Result};
