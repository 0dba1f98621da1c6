//! The balancing (Sinkhorn) iteration and the entropic transport solver.

use alloc::vec::Vec;
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::math::log_sum_exp_by;
use crate::oracle::certificate_decision;
use crate::types::{CostMatrix, ProbabilityVector};

use super::duals::{marginal_residual, plan_from_duals, DualPotentials, TransportPlan};

/// Which potentials a full balancing step refreshes from which.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateOrder {
    /// `λ` from the previous `μ`, then `μ` from the fresh `λ`.
    #[default]
    GaussSeidel,
    /// Both halves from the previous iterate.
    Jacobi,
}

/// When to declare an entropic solve finished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// Stop once the combined marginal defect 2-norm drops to the threshold.
    MarginalResidual(f64),
    /// Stop once the oracle certificate at this `δ` holds (both
    /// `‖Ax−b‖·‖(λ,μ)‖ ≤ δ/2` and `‖Ax−b‖ ≤ δ`).
    OracleCertificate(f64),
    /// Run the full iteration budget.
    MaxIterations,
}

/// Solver knobs. Defaults: Gauss–Seidel order, 10^5 iteration cap,
/// residual tolerance 1e-8, no per-iteration history.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub stop: StoppingRule,
    pub max_iter: usize,
    pub order: UpdateOrder,
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            stop: StoppingRule::MarginalResidual(1e-8),
            max_iter: 100_000,
            order: UpdateOrder::GaussSeidel,
            record_history: false,
        }
    }
}

impl SolverOptions {
    pub fn with_stop(stop: StoppingRule) -> Self {
        Self { stop, ..Self::default() }
    }

    pub fn history(mut self) -> Self {
        self.record_history = true;
        self
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy)]
pub struct BalancingRecord {
    pub iteration: usize,
    pub residual: f64,
}

/// Outcome of [`solve_entropic_ot`].
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub plan: TransportPlan,
    pub duals: DualPotentials,
    /// Primal energy `γ Σ x ln x + Σ c x` of the returned plan.
    pub value: f64,
    pub iterations: usize,
    /// Combined marginal defect 2-norm of the returned plan.
    pub marginal_residual: f64,
    pub converged: bool,
    /// Present when `record_history` was set.
    pub history: Vec<BalancingRecord>,
}

/// λ half-step: `λ_i ← γ ln l_i − γ ln Σ_j exp((μ_j − c_ij)/γ − 1)`.
///
/// Afterwards the (normalized) plan has row marginals exactly `l`.
pub(crate) fn half_step_rows(
    lambda: &mut [f64],
    mu: &[f64],
    cost: &CostMatrix,
    l: &ProbabilityVector,
    gamma: f64,
) {
    let n = cost.n();
    for i in 0..n {
        let lse = log_sum_exp_by(n, |j| (mu[j] - cost.at(i, j)) / gamma - 1.0);
        lambda[i] = gamma * (l.get(i).ln() - lse);
    }
}

/// μ half-step: `μ_j ← γ ln w_j − γ ln Σ_i exp((λ_i − c_ij)/γ − 1)`.
pub(crate) fn half_step_columns(
    mu: &mut [f64],
    lambda: &[f64],
    cost: &CostMatrix,
    w: &ProbabilityVector,
    gamma: f64,
) {
    let n = cost.n();
    for j in 0..n {
        let lse = log_sum_exp_by(n, |i| (lambda[i] - cost.at(i, j)) / gamma - 1.0);
        mu[j] = gamma * (w.get(j).ln() - lse);
    }
}

/// One full balancing step on the dual potentials.
///
/// The updates generalize the unit-regularization formulas by dividing costs
/// and potentials by `gamma`; the `−1` offset in the exponent is kept, so a
/// fixed point reproduces the unnormalized stationarity conditions (the
/// normalized plan is unaffected either way).
pub fn balancing_step(
    duals: &DualPotentials,
    cost: &CostMatrix,
    l: &ProbabilityVector,
    w: &ProbabilityVector,
    gamma: f64,
    order: UpdateOrder,
) -> Result<DualPotentials> {
    check_instance(cost, l, w, gamma)?;
    if duals.lambda.len() != cost.n() {
        return Err(CoreError::DimensionMismatch {
            expected: cost.n(),
            found: duals.lambda.len(),
            what: "lambda length",
        });
    }
    let mut next = duals.clone();
    match order {
        UpdateOrder::GaussSeidel => {
            half_step_rows(&mut next.lambda, &duals.mu, cost, l, gamma);
            let lambda = next.lambda.clone();
            half_step_columns(&mut next.mu, &lambda, cost, w, gamma);
        }
        UpdateOrder::Jacobi => {
            half_step_rows(&mut next.lambda, &duals.mu, cost, l, gamma);
            half_step_columns(&mut next.mu, &duals.lambda, cost, w, gamma);
        }
    }
    Ok(next)
}

fn check_instance(
    cost: &CostMatrix,
    l: &ProbabilityVector,
    w: &ProbabilityVector,
    gamma: f64,
) -> Result<()> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(CoreError::invalid("gamma must be positive and finite"));
    }
    if l.len() != cost.n() {
        return Err(CoreError::DimensionMismatch {
            expected: cost.n(),
            found: l.len(),
            what: "row marginal length",
        });
    }
    if w.len() != cost.n() {
        return Err(CoreError::DimensionMismatch {
            expected: cost.n(),
            found: w.len(),
            what: "column marginal length",
        });
    }
    // Marginals are normalized on construction; totals can only disagree if a
    // caller bypassed that, which the 1e-9 feasibility guard still catches.
    let dl: f64 = l.iter().sum();
    let dw: f64 = w.iter().sum();
    if (dl - dw).abs() > 1e-9 {
        return Err(CoreError::invalid("marginal totals differ by more than 1e-9: infeasible"));
    }
    Ok(())
}

/// Solve the entropy-regularized transport problem by balancing iterations.
///
/// Non-convergence within the iteration budget is reported in the
/// `converged` flag, not as an error.
pub fn solve_entropic_ot(
    cost: &CostMatrix,
    l: &ProbabilityVector,
    w: &ProbabilityVector,
    gamma: f64,
    options: &SolverOptions,
) -> Result<SolveReport> {
    check_instance(cost, l, w, gamma)?;
    let n = cost.n();
    let mut duals = DualPotentials::zeros(n);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut plan = plan_from_duals(&duals, cost, gamma)?;
    let mut residual = marginal_residual(plan.entries(), l, w).norm;

    while iterations < options.max_iter {
        match options.order {
            UpdateOrder::GaussSeidel => {
                half_step_rows(&mut duals.lambda, &duals.mu, cost, l, gamma);
                let lambda = duals.lambda.clone();
                half_step_columns(&mut duals.mu, &lambda, cost, w, gamma);
            }
            UpdateOrder::Jacobi => {
                let prev = duals.clone();
                half_step_rows(&mut duals.lambda, &prev.mu, cost, l, gamma);
                half_step_columns(&mut duals.mu, &prev.lambda, cost, w, gamma);
            }
        }
        iterations += 1;
        plan = plan_from_duals(&duals, cost, gamma)?;
        residual = marginal_residual(plan.entries(), l, w).norm;
        if options.record_history {
            history.push(BalancingRecord { iteration: iterations, residual });
        }
        let stop = match options.stop {
            StoppingRule::MarginalResidual(tol) => residual <= tol,
            StoppingRule::OracleCertificate(delta) => {
                certificate_decision(residual, duals.canonical_norm(), delta)
            }
            StoppingRule::MaxIterations => false,
        };
        if stop {
            converged = true;
            break;
        }
    }

    let value = plan.energy(cost);
    Ok(SolveReport { plan, duals, value, iterations, marginal_residual: residual, converged, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::norm_inf;
    use crate::types::Matrix;
    use alloc::vec;

    fn random_instance(n: usize, seed: u64, scale: f64) -> (CostMatrix, ProbabilityVector, ProbabilityVector) {
        let mut rng = crate::math::SeededSampler::new(seed);
        let cost = CostMatrix::new(Matrix::from_fn(n, n, |_, _| scale * rng.next_f64())).unwrap();
        let l = ProbabilityVector::new((0..n).map(|_| 0.2 + rng.next_f64()).collect()).unwrap();
        let w = ProbabilityVector::new((0..n).map(|_| 0.2 + rng.next_f64()).collect()).unwrap();
        (cost, l, w)
    }

    #[test]
    fn first_lambda_update_from_zero_matches_hand_evaluation() {
        // c = 0, γ = 1, uniform marginals n = 2, start (0, 0):
        // λ_i = −ln((1/0.5)·Σ_j exp(−1)) = −ln(4/e) = 1 − 2 ln 2.
        let cost = CostMatrix::zero(2);
        let uniform = ProbabilityVector::uniform(2);
        let next = balancing_step(
            &DualPotentials::zeros(2),
            &cost,
            &uniform,
            &uniform,
            1.0,
            UpdateOrder::Jacobi,
        )
        .unwrap();
        let expected = 1.0 - 2.0 * core::f64::consts::LN_2;
        assert!((next.lambda[0] - expected).abs() < 1e-14);
        assert!((next.lambda[1] - expected).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_is_preserved_up_to_shift() {
        let (cost, l, w) = random_instance(5, 11, 1.0);
        let report = solve_entropic_ot(
            &cost,
            &l,
            &w,
            1.0,
            &SolverOptions::with_stop(StoppingRule::MarginalResidual(1e-14)),
        )
        .unwrap();
        let stepped =
            balancing_step(&report.duals, &cost, &l, &w, 1.0, UpdateOrder::GaussSeidel).unwrap();
        // Same plan-preserving representative before comparing.
        let a = report.duals.canonicalized();
        let b = stepped.canonicalized();
        for i in 0..5 {
            assert!((a.lambda[i] - b.lambda[i]).abs() < 1e-9);
            assert!((a.mu[i] - b.mu[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn half_steps_hit_their_marginals_exactly() {
        let (cost, l, w) = random_instance(7, 3, 2.0);
        let gamma = 0.8;
        let mut duals = DualPotentials::zeros(7);
        // A couple of warm-up steps away from the start.
        for _ in 0..2 {
            duals = balancing_step(&duals, &cost, &l, &w, gamma, UpdateOrder::GaussSeidel).unwrap();
        }
        half_step_rows(&mut duals.lambda, &duals.mu, &cost, &l, gamma);
        let after_rows = plan_from_duals(&duals, &cost, gamma).unwrap();
        let row_defect: Vec<f64> = after_rows
            .row_marginals()
            .iter()
            .zip(l.iter())
            .map(|(s, m)| s - m)
            .collect();
        assert!(norm_inf(&row_defect) <= 1e-12);

        let lambda = duals.lambda.clone();
        half_step_columns(&mut duals.mu, &lambda, &cost, &w, gamma);
        let after_cols = plan_from_duals(&duals, &cost, gamma).unwrap();
        let col_defect: Vec<f64> = after_cols
            .col_marginals()
            .iter()
            .zip(w.iter())
            .map(|(s, m)| s - m)
            .collect();
        assert!(norm_inf(&col_defect) <= 1e-12);
    }

    #[test]
    fn zero_cost_solution_is_product_measure() {
        let l = ProbabilityVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let w = ProbabilityVector::new(vec![0.6, 0.1, 0.3]).unwrap();
        let gamma = 1.3;
        let report = solve_entropic_ot(
            &CostMatrix::zero(3),
            &l,
            &w,
            gamma,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(report.converged);
        for i in 0..3 {
            for j in 0..3 {
                assert!((report.plan.entries().at(i, j) - l.get(i) * w.get(j)).abs() < 1e-9);
            }
        }
        let expected = -gamma * (l.entropy() + w.entropy());
        assert!((report.value - expected).abs() < 1e-9);
    }

    #[test]
    fn symmetric_instance_value_matches_stationarity_oracle() {
        // Same 1-D oracle as in duals.rs: a + b = 1/2, b = a e^{−1}.
        let cost =
            CostMatrix::new(Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap())
                .unwrap();
        let u = ProbabilityVector::uniform(2);
        let report = solve_entropic_ot(
            &cost,
            &u,
            &u,
            1.0,
            &SolverOptions::with_stop(StoppingRule::MarginalResidual(1e-13)),
        )
        .unwrap();
        let a = 0.5 / (1.0 + (-1.0f64).exp());
        let b = a * (-1.0f64).exp();
        let expected = 2.0 * (a * a.ln() + b * b.ln()) + 2.0 * b;
        assert!((report.value - expected).abs() < 1e-10);
    }

    #[test]
    fn report_residual_matches_recomputation() {
        let (cost, l, w) = random_instance(6, 21, 1.5);
        let report =
            solve_entropic_ot(&cost, &l, &w, 1.0, &SolverOptions::default()).unwrap();
        let recomputed = marginal_residual(report.plan.entries(), &l, &w).norm;
        assert!((report.marginal_residual - recomputed).abs() <= 1e-12);
    }

    #[test]
    fn non_convergence_is_reported_not_raised() {
        let (cost, l, w) = random_instance(4, 5, 1.0);
        let mut options = SolverOptions::with_stop(StoppingRule::MarginalResidual(1e-16));
        options.max_iter = 2;
        let report = solve_entropic_ot(&cost, &l, &w, 1.0, &options).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 2);
    }

    #[test]
    fn jacobi_and_gauss_seidel_agree_at_the_fixed_point() {
        let (cost, l, w) = random_instance(5, 42, 1.0);
        let tight = SolverOptions::with_stop(StoppingRule::MarginalResidual(1e-13));
        let gs = solve_entropic_ot(&cost, &l, &w, 1.0, &tight).unwrap();
        let jac = solve_entropic_ot(
            &cost,
            &l,
            &w,
            1.0,
            &SolverOptions { order: UpdateOrder::Jacobi, ..tight.clone() },
        )
        .unwrap();
        for k in 0..25 {
            let a = gs.plan.entries().as_slice()[k];
            let b = jac.plan.entries().as_slice()[k];
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mismatched_dimensions_error() {
        let cost = CostMatrix::zero(3);
        let l = ProbabilityVector::uniform(2);
        let w = ProbabilityVector::uniform(3);
        assert!(matches!(
            solve_entropic_ot(&cost, &l, &w, 1.0, &SolverOptions::default()),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }
}
