//! Overflow probabilities for two parallel queues with a shared arrival stream.
//!
//! The probability that the total queue length reaches `n` before both queues
//! empty is approximated through harmonic functions of a constrained random
//! walk, and checked against exact lattice solvers and Monte Carlo.

pub mod approx;
pub mod cli;
pub mod error;
pub mod grid;
pub mod harmonic;
pub mod ldrate;
pub mod linalg;
pub mod model;
pub mod simulate;
pub mod surface;

pub use error::{Error, Result};
pub use model::{AssumptionReport, DerivedRates, LatticePoint, Picture, QueueParams};
