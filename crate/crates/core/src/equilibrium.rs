//! Multi-stage transport equilibrium: the outer problem over network
//! parameters.
//!
//! The outer objective is
//!
//! ```text
//! f(y) = min_{λ,μ} { ln Σ_ij exp(−c_ij(y) + λ_i + μ_j) − ⟨λ, l⟩ − ⟨μ, w⟩ } − g(y),
//! ```
//!
//! convex in `y` for concave smooth `c_ij` and `g`. Each oracle call solves
//! the inner problem by balancing to a residual certificate and assembles
//! the gradient from the certified plan:
//! `∇f(y) = −Σ_ij x_ij ∇c_ij(y) − ∇g(y)`, which is independent of the
//! additive freedom in the potentials. The outer loop is the universal
//! method on the box `y ≥ ȳ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::math::{self, log_sum_exp_by};
use crate::oracle::{
    make_inexact_oracle, InexactOracle, InnerProblem, InnerSolution, OracleMode, OracleReply,
};
use crate::ot::{
    solve_entropic_ot, DualPotentials, SolverOptions, StoppingRule, TransportPlan,
};
use crate::types::{CostMatrix, ProbabilityVector};
use crate::universal::{universal_method, MethodOrder, ProxSetup};

/// See `barycenter`: certificates below the attainable residual floor are
/// clamped.
const CERTIFICATE_FLOOR: f64 = 1e-13;

/// Accuracy of the final re-solve that produces the reported value and plan.
const REPORT_DELTA: f64 = 1e-10;

/// Problem data for the outer loop: parameter-dependent costs plus an
/// additive concave term. Models must keep `c_ij(y) ≥ 0` on the feasible
/// set; affine models extend harmlessly a little beyond it.
pub trait CostModel {
    /// Dimension of the parameter vector `y`.
    fn outer_dim(&self) -> usize;
    /// Support size `n` of the transport instance.
    fn size(&self) -> usize;
    /// Cost matrix at `y`.
    fn cost(&self, y: &[f64]) -> Result<CostMatrix>;
    /// Writes `∇c_ij(y)` into `out` (length `outer_dim`).
    fn cost_gradient(&self, y: &[f64], i: usize, j: usize, out: &mut [f64]);
    /// The additive concave term `g(y)`.
    fn offset(&self, y: &[f64]) -> f64;
    /// `∇g(y)`.
    fn offset_gradient(&self, y: &[f64]) -> Vec<f64>;
    /// Whether all `c_ij` have Lipschitz gradients; drives the oracle mode
    /// (and the recommended family parameter `p`).
    fn smooth(&self) -> bool;
    /// Optional bound on the joint gradient Lipschitz constant of the saddle
    /// function, used to declare oracle constants.
    fn joint_lipschitz(&self) -> Option<f64> {
        None
    }
}

/// Box feasible set `y ≥ lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    pub lower: Vec<f64>,
}

impl FeasibleSet {
    pub fn new(lower: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::invalid("box lower bounds must be non-empty and finite"));
        }
        Ok(Self { lower })
    }

    /// Default starting point: componentwise `max(lower, 0)`.
    pub fn start(&self) -> Vec<f64> {
        self.lower.iter().map(|&lo| lo.max(0.0)).collect()
    }
}

/// Eq.-style gradient assembly from a certified plan:
/// `−Σ_ij x_ij ∇c_ij(y) − ∇g(y)`. The accumulation runs in fixed `(i, j)`
/// order, so results are reproducible.
pub fn danskin_gradient(model: &dyn CostModel, y: &[f64], plan: &TransportPlan) -> Vec<f64> {
    let d = model.outer_dim();
    let n = model.size();
    let mut grad = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    for i in 0..n {
        for j in 0..n {
            model.cost_gradient(y, i, j, &mut scratch);
            math::axpy(-plan.entries().at(i, j), &scratch, &mut grad);
        }
    }
    math::axpy(-1.0, &model.offset_gradient(y), &mut grad);
    grad
}

/// The inner entropy-linear problem behind the outer objective. Keeps a
/// running count of balancing iterations across oracle calls.
pub struct EquilibriumInner<'a> {
    model: &'a dyn CostModel,
    l: &'a ProbabilityVector,
    w: &'a ProbabilityVector,
    pub inner_iterations: usize,
}

impl<'a> EquilibriumInner<'a> {
    pub fn new(
        model: &'a dyn CostModel,
        l: &'a ProbabilityVector,
        w: &'a ProbabilityVector,
    ) -> Self {
        Self { model, l, w, inner_iterations: 0 }
    }

    fn solve_at(&mut self, y: &[f64], delta: f64) -> Result<(f64, Vec<f64>, DualPotentials, TransportPlan)> {
        let cost = self.model.cost(y)?;
        let report = solve_entropic_ot(
            &cost,
            self.l,
            self.w,
            1.0,
            &SolverOptions::with_stop(StoppingRule::OracleCertificate(delta)),
        )?;
        self.inner_iterations += report.iterations;
        if !report.converged {
            return Err(CoreError::ToleranceNotReached {
                requested: delta,
                achieved: report.marginal_residual,
            });
        }
        let n = cost.n();
        let duals = report.duals;
        let log_partition = log_sum_exp_by(n * n, |k| {
            let (i, j) = (k / n, k % n);
            -cost.at(i, j) + duals.lambda[i] + duals.mu[j]
        });
        let value = log_partition
            - math::dot(&duals.lambda, self.l.as_slice())
            - math::dot(&duals.mu, self.w.as_slice())
            - self.model.offset(y);
        let gradient = danskin_gradient(self.model, y, &report.plan);
        Ok((value, gradient, duals, report.plan))
    }
}

impl InnerProblem for EquilibriumInner<'_> {
    fn dimension(&self) -> usize {
        self.model.outer_dim()
    }

    fn solve_inner(&mut self, point: &[f64], delta: f64) -> Result<InnerSolution> {
        let delta = delta.max(CERTIFICATE_FLOOR);
        let (value, gradient, _, _) = self.solve_at(point, delta)?;
        Ok(InnerSolution { objective: value, gradient, certified_delta: delta })
    }
}

/// Build the inexact oracle for the outer objective: certified-saddle
/// constants for smooth models, the subgradient route otherwise.
pub fn equilibrium_oracle<'a>(
    model: &'a dyn CostModel,
    l: &'a ProbabilityVector,
    w: &'a ProbabilityVector,
    delta: f64,
) -> Result<InexactOracle<EquilibriumInner<'a>>> {
    let mode = if model.smooth() {
        OracleMode::SmoothSaddle { lipschitz: model.joint_lipschitz() }
    } else {
        OracleMode::Subgradient { gradient_bound: None }
    };
    make_inexact_oracle(EquilibriumInner::new(model, l, w), mode, delta)
}

/// One oracle reply for the outer objective at accuracy `delta`.
pub fn f_oracle(
    y: &[f64],
    model: &dyn CostModel,
    l: &ProbabilityVector,
    w: &ProbabilityVector,
    delta: f64,
) -> Result<OracleReply> {
    let mut oracle = equilibrium_oracle(model, l, w, delta)?;
    oracle.reply(y)
}

/// Objective value `f(y)` at certificate accuracy `delta` (no oracle
/// offsets applied); the reference evaluator for grids and derivative
/// checks.
pub fn objective_value(
    model: &dyn CostModel,
    l: &ProbabilityVector,
    w: &ProbabilityVector,
    y: &[f64],
    delta: f64,
) -> Result<f64> {
    let mut inner = EquilibriumInner::new(model, l, w);
    let (value, _, _, _) = inner.solve_at(y, delta.max(CERTIFICATE_FLOOR))?;
    Ok(value)
}

/// Result of [`solve_equilibrium`].
#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub y: Vec<f64>,
    /// `f(y)` re-solved at reporting accuracy.
    pub value: f64,
    /// Plan and potentials of that final inner solve; the plan equals
    /// `plan_from_duals(duals, c(y))` by construction.
    pub plan: TransportPlan,
    pub duals: DualPotentials,
    pub outer_iterations: usize,
    /// Total balancing iterations across all oracle calls.
    pub inner_iterations: usize,
    pub oracle_calls: usize,
    pub converged: bool,
}

/// Minimize the outer objective over the box with the universal method.
pub fn solve_equilibrium(
    model: &dyn CostModel,
    l: &ProbabilityVector,
    w: &ProbabilityVector,
    feasible: &FeasibleSet,
    eps: f64,
    order: MethodOrder,
    max_iter: usize,
) -> Result<EquilibriumReport> {
    if feasible.lower.len() != model.outer_dim() {
        return Err(CoreError::DimensionMismatch {
            expected: model.outer_dim(),
            found: feasible.lower.len(),
            what: "feasible-set dimension",
        });
    }
    let mut oracle = equilibrium_oracle(model, l, w, eps.max(CERTIFICATE_FLOOR))?;
    let prox = ProxSetup::EuclideanBox { lower: feasible.lower.clone() };
    let start = feasible.start();
    let run = universal_method(&mut oracle, &prox, &start, eps, order, max_iter)?;

    let inner = oracle.inner_mut();
    let (value, _, duals, plan) = inner.solve_at(&run.point, REPORT_DELTA)?;
    Ok(EquilibriumReport {
        y: run.point,
        value,
        plan,
        duals,
        outer_iterations: run.history.iterations,
        inner_iterations: inner.inner_iterations,
        oracle_calls: run.history.oracle_calls,
        converged: run.converged,
    })
}

/// Affine toy model: `c_ij(y) = c⁰_ij + ⟨s_ij, y⟩` with nonnegative
/// sensitivities, and `g(y) = −(β/2)‖y − ŷ‖²`. Concave and smooth in `y`,
/// nonnegative on any box with `ȳ ≥ 0`.
#[derive(Debug, Clone)]
pub struct ToyCostModel {
    base: CostMatrix,
    /// Row-major `n²` blocks of length `dim`.
    sensitivities: Vec<Vec<f64>>,
    beta: f64,
    y_hat: Vec<f64>,
}

impl ToyCostModel {
    pub fn new(
        base: CostMatrix,
        sensitivities: Vec<Vec<f64>>,
        beta: f64,
        y_hat: Vec<f64>,
    ) -> Result<Self> {
        let n = base.n();
        if sensitivities.len() != n * n {
            return Err(CoreError::DimensionMismatch {
                expected: n * n,
                found: sensitivities.len(),
                what: "sensitivity blocks",
            });
        }
        let dim = y_hat.len();
        if dim == 0 {
            return Err(CoreError::invalid("parameter dimension must be positive"));
        }
        for (k, s) in sensitivities.iter().enumerate() {
            if s.len() != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    found: s.len(),
                    what: "sensitivity vector length",
                });
            }
            if s.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(CoreError::invalid(alloc::format!(
                    "sensitivity block {k} has a negative or non-finite entry"
                )));
            }
        }
        if beta <= 0.0 || !beta.is_finite() {
            return Err(CoreError::invalid("beta must be positive and finite"));
        }
        if y_hat.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::invalid("target point must be finite"));
        }
        Ok(Self { base, sensitivities, beta, y_hat })
    }

    /// Constant-cost special case (all sensitivities zero).
    pub fn constant(base: CostMatrix, beta: f64, y_hat: Vec<f64>) -> Result<Self> {
        let n = base.n();
        let dim = y_hat.len();
        Self::new(base, vec![vec![0.0; dim]; n * n], beta, y_hat)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn y_hat(&self) -> &[f64] {
        &self.y_hat
    }
}

impl CostModel for ToyCostModel {
    fn outer_dim(&self) -> usize {
        self.y_hat.len()
    }

    fn size(&self) -> usize {
        self.base.n()
    }

    fn cost(&self, y: &[f64]) -> Result<CostMatrix> {
        let n = self.base.n();
        let mut m = crate::types::Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.base.at(i, j) + math::dot(&self.sensitivities[i * n + j], y));
            }
        }
        CostMatrix::new(m)
    }

    fn cost_gradient(&self, _y: &[f64], i: usize, j: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.sensitivities[i * self.base.n() + j]);
    }

    fn offset(&self, y: &[f64]) -> f64 {
        let d = math::sub(y, &self.y_hat);
        -0.5 * self.beta * math::dot(&d, &d)
    }

    fn offset_gradient(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.y_hat).map(|(&v, &t)| -self.beta * (v - t)).collect()
    }

    fn smooth(&self) -> bool {
        true
    }

    fn joint_lipschitz(&self) -> Option<f64> {
        // ∇²Φ ⪯ ‖J‖²·I + β with J the affine exponent map; crude but valid:
        // ‖J‖² ≤ 3·max(n, Σ_ij ‖s_ij‖²).
        let n = self.base.n() as f64;
        let s_total: f64 = self.sensitivities.iter().map(|s| math::dot(s, s)).sum();
        Some(3.0 * n.max(s_total) + self.beta)
    }
}
