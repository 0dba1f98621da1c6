//! The semi-dual of the smoothed transport distance and both gradients.
//!
//! Eliminating the column potential from the transport dual leaves a finite
//! unconstrained functional of `λ` alone,
//!
//! ```text
//! H*(λ) = γ Σ_j w_j ln( (1/w_j) Σ_i exp((−c_ij + λ_i)/γ) ),
//! ```
//!
//! the Legendre conjugate of `l ↦ Δ(l, w)` over the simplex. Its value and
//! gradient are closed-form log-sum-exp expressions; the gradient of the
//! distance itself is the converged, zero-mean row potential.

use alloc::vec;
use alloc::vec::Vec;
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::math::{self, log_sum_exp_by};
use crate::types::{CostMatrix, ProbabilityVector};

use super::balancing::{solve_entropic_ot, SolverOptions, StoppingRule};

/// Closed-form evaluation of the conjugate `H*(λ)` for marginal `w`.
pub fn semidual_value(
    lambda: &[f64],
    w: &ProbabilityVector,
    cost: &CostMatrix,
    gamma: f64,
) -> Result<f64> {
    let n = check_args(lambda, w, cost, gamma)?;
    let mut value = 0.0;
    for j in 0..n {
        let lse = log_sum_exp_by(n, |i| (lambda[i] - cost.at(i, j)) / gamma);
        value += w.get(j) * (lse - w.get(j).ln());
    }
    Ok(gamma * value)
}

/// Gradient of the conjugate: the `w`-weighted column softmax of
/// `(−c + λ)/γ`, a point on the simplex.
pub fn semidual_gradient(
    lambda: &[f64],
    w: &ProbabilityVector,
    cost: &CostMatrix,
    gamma: f64,
) -> Result<ProbabilityVector> {
    let n = check_args(lambda, w, cost, gamma)?;
    let mut grad = vec![0.0; n];
    for j in 0..n {
        let lse = log_sum_exp_by(n, |i| (lambda[i] - cost.at(i, j)) / gamma);
        let wj = w.get(j);
        for (i, g) in grad.iter_mut().enumerate() {
            *g += wj * ((lambda[i] - cost.at(i, j)) / gamma - lse).exp();
        }
    }
    ProbabilityVector::new(grad)
}

/// Gradient of `l ↦ Δ(l, w)`: the converged row potential shifted to zero
/// mean. Runs a balancing solve to the marginal-residual tolerance `tol` and
/// propagates non-convergence with the achieved residual.
pub fn distance_gradient(
    l: &ProbabilityVector,
    w: &ProbabilityVector,
    cost: &CostMatrix,
    gamma: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let report = solve_entropic_ot(
        cost,
        l,
        w,
        gamma,
        &SolverOptions::with_stop(StoppingRule::MarginalResidual(tol)),
    )?;
    if !report.converged {
        return Err(CoreError::ToleranceNotReached {
            requested: tol,
            achieved: report.marginal_residual,
        });
    }
    let shift = math::mean(&report.duals.lambda);
    Ok(report.duals.lambda.iter().map(|v| v - shift).collect())
}

fn check_args(
    lambda: &[f64],
    w: &ProbabilityVector,
    cost: &CostMatrix,
    gamma: f64,
) -> Result<usize> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(CoreError::invalid("gamma must be positive and finite"));
    }
    let n = cost.n();
    if lambda.len() != n {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            found: lambda.len(),
            what: "lambda length",
        });
    }
    if w.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, found: w.len(), what: "marginal length" });
    }
    Ok(n)
}
