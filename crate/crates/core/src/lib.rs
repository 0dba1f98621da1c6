//! Entropy-regularized optimal transport toolkit.
//!
//! The crate is organized around one pipeline:
//!
//! - [`ot`] — matrix-balancing (Sinkhorn) solvers for the entropy-smoothed
//!   transport distance, its semi-dual, and both gradients, all in log domain;
//! - [`oracle`] — wrappers that turn an approximately solved inner problem
//!   into an inexact first-order oracle with certified accuracy constants;
//! - [`universal`] — universal gradient methods (plain and accelerated) that
//!   consume such oracles without knowing any Lipschitz constants;
//! - [`barycenter`] — Wasserstein-barycenter solvers under entropic smoothing,
//!   in both the primal (simplex) and dual (unconstrained) formulations;
//! - [`equilibrium`] — the multi-stage transport-equilibrium outer loop with
//!   Danskin gradients and pluggable cost models.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live in
//! the companion `etk` crate. Enable the `parallel` feature to evaluate the
//! independent per-measure terms of barycenter objectives on a thread pool.

#![no_std]
#![warn(clippy::all)]

extern crate alloc;

#[cfg(any(test, feature = "parallel"))]
extern crate std;

pub mod barycenter;
pub mod equilibrium;
pub mod error;
pub mod math;
pub mod oracle;
pub mod ot;
pub mod types;
pub mod universal;

pub use error::{CoreError, Result};
pub use types::{CostMatrix, Matrix, ProbabilityVector};
