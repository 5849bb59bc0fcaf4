//! Instance generators: random Euclidean and graph metrics, and the
//! reduction gadget from bounded 3-dimensional matching.

mod fractional;
mod gadget;
mod random;

pub use fractional::random_fractional;
pub use gadget::{gen_3dm_gadget, Gadget, GadgetSpec3DM, GADGET_CAPACITY};
pub use random::{gen_random_euclidean, gen_random_metric, CapacityMode, EuclideanGenParams, MetricGenParams};

#[cfg(test)]
mod tests;
