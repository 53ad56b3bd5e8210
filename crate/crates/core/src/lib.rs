//! Two-neighbour bootstrap percolation laboratory.
//!
//! Simulation core for the modified and classical two-neighbour models on
//! finite boxes of the square lattice: growth dynamics and infection times,
//! the diagonal/sideways/alternating growth-event calculus with canonical
//! witnesses and schedule reconstruction, exact log-space event
//! probabilities assembled into a multi-scale union lower bound on the
//! filling probability, reproducible Monte Carlo estimation, and exhaustive
//! small-lattice enumeration used as ground truth.
//!
//! With the default `parallel` feature, Monte Carlo trials, subset
//! enumeration and schedule sums run on rayon; results are bit-identical to
//! the sequential fallback and independent of the worker count.

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod events;
mod exec;
pub mod lattice;
pub mod montecarlo;
pub mod oracle;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{Configuration, Rect, SampleSpec, Site};
pub use dynamics::ModelKind;
