//! Simulation and observational identification of two-point quantum causal
//! structures.
//!
//! A hidden mechanism links two qubit measurements at points X and Y. It is
//! either a *direct cause* (the qubit measured at X passes through a unitary
//! channel to Y) or a *common cause* (X and Y measure the two halves of a
//! bipartite state). The [`identify`] module decides which, using only
//! correlation queries against a [`comb::MeasurementOracle`].

pub mod bench;
pub mod comb;
pub mod error;
pub mod geometry;
pub mod identify;
pub mod linalg;
pub mod scenarios;

pub use error::{Error, Result};
