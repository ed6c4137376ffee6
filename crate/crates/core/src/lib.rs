//! Minimum-latency uncapacitated facility location (MLUFL) toolkit.
//!
//! The crate is organised around the pipeline *instance → LP relaxation →
//! rounding → evaluation*:
//!
//! * [`instance`] holds problem data, generators, file I/O and the exact
//!   objective evaluator.
//! * [`lpcore`] is a self-contained dense simplex solver with warm-started
//!   row and column addition, a max-flow routine and a cutting-plane driver.
//! * [`relaxations`] builds the time-indexed LPs, their separation oracles and
//!   the column-generation solver with exact orienteering pricing.
//! * [`treekit`] provides tree embeddings, randomized subtree rounding, MSTs,
//!   Euler tours and tour concatenation.
//! * [`round_general`], [`round_related`], [`round_uniform`] and [`round_ml`]
//!   are the rounding algorithms; each returns per-run certificates.
//! * [`exact`] contains brute-force and DP oracles used as ground truth.
//!
//! Batch work (Monte-Carlo trials, separation sweeps, pricing) goes through
//! [`par`], which uses rayon when the `parallel` feature is enabled and a plain
//! sequential loop otherwise.

pub mod error;
pub mod exact;
pub mod instance;
pub mod lpcore;
pub mod metric;
pub mod par;
pub mod relaxations;
pub mod rng;
pub mod round_general;
pub mod round_ml;
pub mod round_related;
pub mod round_uniform;
pub mod treekit;

pub use error::{Error, Result};
pub use instance::{CostBreakdown, EvalMode, Instance, LatencyFn, Solution, Tag};
pub use metric::Metric;

/// Additive tolerance used when comparing certificate inequalities.
pub const CERT_TOL: f64 = 1e-6;
