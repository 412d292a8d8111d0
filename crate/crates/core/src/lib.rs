//! Majority dynamics on Erdős–Rényi random graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] builds immutable compressed-adjacency graphs, either sampled
//!   from `G(n, p)` or from explicit edge lists.
//! * [`coloring`] produces initial Red/Blue colorings under the fixed
//!   advantage, random 1/2 and balanced-plus-defectors schemes.
//! * [`dynamics`] runs the synchronous majority update until unanimity, a
//!   fixed point, a two-cycle or a day cap.
//! * [`analysis`] computes per-vertex diagnostics (discrepancies, almost-Red
//!   sets, flipping and vulnerable vertices, neighbourhood regularity).
//! * [`bounds`] holds binomial tail bounds, exact oracles and the closed-form
//!   day-one estimates.
//! * [`harness`] orchestrates seeded Monte Carlo trials, sweeps, threshold
//!   bisection and log-log scaling fits.
//!
//! With the default `parallel` feature, trial batches and per-vertex loops run
//! on rayon; without it every path is sequential. Results never depend on the
//! execution mode.

pub mod analysis;
pub mod bounds;
pub mod coloring;
pub mod dynamics;
mod error;
pub mod graph;
pub mod harness;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
