//! Approximation schemes for maximizing smooth multilinear polynomials over
//! binary vectors, with Max-Cut, Max-k-CSP and k-Densest Subgraph front ends.
//!
//! The pipeline samples a few variables, guesses their values, estimates every
//! node of a recursive decomposition of the polynomial from that guess,
//! solves the resulting linear relaxation and rounds it.

pub mod assignment;
pub mod csp;
pub mod error;
pub mod estimator;
pub mod generate;
pub mod graph;
pub mod oracle;
pub mod poly;
pub mod relaxation;
pub mod rounding;
pub mod scheme;
pub mod rng;
mod simplex;

pub use assignment::Assignment;
pub use error::{Error, Result};
pub use graph::Graph;
