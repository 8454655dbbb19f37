//! Few-shot end-to-end latency prediction for neural-network cells on edge
//! device runtimes.
//!
//! A device-runtime is characterized by per-operator performance-counter
//! profiles, normalized into event rates. A small feed-forward regressor maps
//! an architecture encoding plus that descriptor to latency. It is trained on
//! a pool of known devices plus a handful of rank-stratified adaptation
//! measurements from the unseen target. A layer-wise look-up table serves as
//! the baseline, and a synthetic device oracle stands in for real hardware.

pub mod archspace;
pub mod baselines;
pub mod counters;
pub mod error;
pub mod harness;
pub mod regressor;
pub mod sampler;
pub mod seed;
pub mod synthdev;

pub use error::{Error, Result};
