//! Capacitated covering of points by balls in metric and Euclidean spaces.
//!
//! The pipeline solves the natural LP relaxation, rounds it to a bi-criteria
//! solution (few balls, each expanded by a bounded factor) and extracts an
//! integral assignment by max-flow. Small instances can be solved exactly.

pub mod error;
pub mod exact;
pub mod gen;
pub mod instance;
pub mod lpcore;
pub mod relax;
pub mod round_euclid;
pub mod round_metric;
pub mod solution;
#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use solution::RoundedSolution;
pub use instance::{Ball, Geometry, MetricInstance, Node, ValidationReport, Violation, ViolationKind};
