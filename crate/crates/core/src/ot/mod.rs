//! Entropy-regularized optimal transport.
//!
//! The smoothed transport distance between marginals `l` and `w` with cost
//! `c` and regularization `gamma` is
//!
//! ```text
//! Δ(l, w) = min { γ Σ x_ij ln x_ij + Σ c_ij x_ij : x has marginals (l, w) }
//! ```
//!
//! Its dual is solved by alternating closed-form updates of the potentials
//! (the balancing method, a.k.a. Sinkhorn matrix scaling). Everything here is
//! computed in log domain: plans are exponentiated only on output, so the
//! solver tolerates costs and potentials far outside the range where naive
//! kernel scaling underflows.

mod balancing;
mod duals;
mod hilbert;
mod semidual;

pub use balancing::{
    balancing_step, solve_entropic_ot, BalancingRecord, SolveReport, SolverOptions, StoppingRule,
    UpdateOrder,
};
pub use duals::{marginal_residual, plan_from_duals, DualPotentials, MarginalResidual, TransportPlan};
pub use hilbert::hilbert_metric;
pub use semidual::{distance_gradient, semidual_gradient, semidual_value};
