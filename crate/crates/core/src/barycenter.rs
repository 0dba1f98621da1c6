//! Wasserstein barycenters under entropic smoothing.
//!
//! The barycenter of measures `w_1..w_m` on a shared support minimizes
//! `Σ_k Δ(l, w_k)` over the simplex. Two routes are provided:
//!
//! - **primal**: the accelerated universal method on the simplex, fed by a
//!   subgradient-mode inexact oracle whose every reply is assembled from `m`
//!   certified balancing solves;
//! - **dual**: the smooth unconstrained problem
//!   `Σ_{k<m} H*_k(λ^k) + H*_m(−Σ λ^k)` over `(m−1)·n` variables, with the
//!   barycenter recovered from the conjugate gradients.
//!
//! Sliding-window re-solves keep the dual state warm: dropping the first `r`
//! measures and appending `r` new ones re-uses the previous potentials with
//! the implicit last block copied into the fresh slots.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::math;
use crate::oracle::{
    make_inexact_oracle, ExactOracle, InnerProblem, InnerSolution, OracleMode,
};
use crate::ot::{
    semidual_gradient, semidual_value, solve_entropic_ot, SolveReport, SolverOptions, StoppingRule,
};
use crate::types::{CostMatrix, ProbabilityVector};
use crate::universal::{universal_method, MethodOrder, ProxSetup, RunHistory};

/// Certificates below this are clamped: marginal residuals of a size-n plan
/// bottom out around n·1e-16, so finer requests are unmeetable noise.
const CERTIFICATE_FLOOR: f64 = 1e-13;

const DEFAULT_MAX_OUTER: usize = 200_000;

/// A barycenter instance: `m ≥ 1` measures on one shared support with a
/// common cost matrix.
#[derive(Debug, Clone)]
pub struct BarycenterProblem {
    measures: Vec<ProbabilityVector>,
    cost: CostMatrix,
    gamma: f64,
}

impl BarycenterProblem {
    pub fn new(measures: Vec<ProbabilityVector>, cost: CostMatrix, gamma: f64) -> Result<Self> {
        if measures.is_empty() {
            return Err(CoreError::invalid("need at least one measure"));
        }
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(CoreError::invalid("gamma must be positive and finite"));
        }
        let n = cost.n();
        for (k, m) in measures.iter().enumerate() {
            if m.len() != n {
                return Err(CoreError::DimensionMismatch {
                    expected: n,
                    found: m.len(),
                    what: if k == 0 { "measure length" } else { "measure length (later index)" },
                });
            }
        }
        if gamma < 0.01 {
            log::warn!(
                "barycenter smoothing gamma = {gamma:e} < 0.01: conjugate gradients grow like 1/gamma and the balancing solves degrade"
            );
        }
        Ok(Self { measures, cost, gamma })
    }

    pub fn measures(&self) -> &[ProbabilityVector] {
        &self.measures
    }

    pub fn cost(&self) -> &CostMatrix {
        &self.cost
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn m(&self) -> usize {
        self.measures.len()
    }

    pub fn n(&self) -> usize {
        self.cost.n()
    }
}

fn solve_term(
    problem: &BarycenterProblem,
    l: &ProbabilityVector,
    k: usize,
    stop: StoppingRule,
) -> Result<SolveReport> {
    let report = solve_entropic_ot(
        &problem.cost,
        l,
        &problem.measures[k],
        problem.gamma,
        &SolverOptions::with_stop(stop),
    )?;
    if !report.converged {
        let requested = match stop {
            StoppingRule::MarginalResidual(t) | StoppingRule::OracleCertificate(t) => t,
            StoppingRule::MaxIterations => f64::NAN,
        };
        return Err(CoreError::ToleranceNotReached {
            requested,
            achieved: report.marginal_residual,
        });
    }
    Ok(report)
}

/// Run `f` over all measure indices, in parallel when the `parallel` feature
/// is enabled. Results are combined by the caller in index order either way,
/// so the reduction is reproducible.
fn map_terms<T: Send>(
    m: usize,
    f: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..m).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..m).map(f).collect()
    }
}

/// Value and gradient of `Σ_k Δ(l, w_k)` at `l`, each term solved to the
/// marginal-residual tolerance `tol`.
///
/// The gradient is the sum of the `m` zero-mean converged row potentials,
/// hence itself zero-mean and tangent to the simplex.
pub fn objective(
    problem: &BarycenterProblem,
    l: &ProbabilityVector,
    tol: f64,
) -> Result<(f64, Vec<f64>)> {
    let reports = map_terms(problem.m(), |k| {
        solve_term(problem, l, k, StoppingRule::MarginalResidual(tol))
    })?;
    let mut value = 0.0;
    let mut grad = vec![0.0; problem.n()];
    for report in &reports {
        value += report.value;
        let shift = math::mean(&report.duals.lambda);
        for (g, v) in grad.iter_mut().zip(&report.duals.lambda) {
            *g += v - shift;
        }
    }
    Ok((value, grad))
}

/// The barycenter objective as an inner problem for the oracle machinery:
/// each evaluation runs the `m` balancing solves to a per-term certificate
/// and reports the sum of semi-dual minorants with its subgradient.
struct ObjectiveInner<'a> {
    problem: &'a BarycenterProblem,
}

impl InnerProblem for ObjectiveInner<'_> {
    fn dimension(&self) -> usize {
        self.problem.n()
    }

    fn solve_inner(&mut self, point: &[f64], delta: f64) -> Result<InnerSolution> {
        let problem = self.problem;
        let m = problem.m();
        let per_term = (delta / m as f64).max(CERTIFICATE_FLOOR);
        let l = ProbabilityVector::new(point.to_vec())?;
        let reports = map_terms(m, |k| {
            solve_term(problem, &l, k, StoppingRule::OracleCertificate(per_term))
        })?;
        let mut value = 0.0;
        let mut grad = vec![0.0; problem.n()];
        for (k, report) in reports.iter().enumerate() {
            let shift = math::mean(&report.duals.lambda);
            let centered: Vec<f64> = report.duals.lambda.iter().map(|v| v - shift).collect();
            // Semi-dual value at the centered potential: a true minorant of
            // the k-th distance term.
            value += math::dot(&centered, l.as_slice())
                - semidual_value(&centered, &problem.measures[k], &problem.cost, problem.gamma)?;
            let _ = k;
            math::axpy(1.0, &centered, &mut grad);
        }
        Ok(InnerSolution {
            objective: value,
            gradient: grad,
            certified_delta: per_term * m as f64,
        })
    }
}

/// Primal barycenter result.
#[derive(Debug, Clone)]
pub struct PrimalSolution {
    pub barycenter: ProbabilityVector,
    /// `Σ_k Δ(L*, w_k)` re-evaluated at the solution.
    pub objective: f64,
    pub converged: bool,
    pub run: RunHistory,
}

/// Solve the primal problem on the simplex with the accelerated universal
/// method; inner accuracies follow the oracle schedule for the target `eps`.
pub fn solve_primal(problem: &BarycenterProblem, eps: f64) -> Result<PrimalSolution> {
    let n = problem.n();
    let mut oracle = make_inexact_oracle(
        ObjectiveInner { problem },
        OracleMode::Subgradient { gradient_bound: None },
        eps.max(CERTIFICATE_FLOOR),
    )?;
    let prox = ProxSetup::EntropicSimplex { dim: n };
    let start = vec![1.0 / n as f64; n];
    let run = universal_method(
        &mut oracle,
        &prox,
        &start,
        eps,
        MethodOrder::Accelerated,
        DEFAULT_MAX_OUTER,
    )?;
    let barycenter = ProbabilityVector::new(run.point.clone())?;
    let (objective, _) = objective(problem, &barycenter, 1e-10)?;
    Ok(PrimalSolution { barycenter, objective, converged: run.converged, run: run.history })
}

/// Dual potentials of the barycenter problem: `m − 1` blocks of length `n`;
/// the implicit last block is `λ^m = −Σ_k λ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub potentials: Vec<Vec<f64>>,
}

impl DualState {
    pub fn zeros(m: usize, n: usize) -> Result<Self> {
        if m < 2 {
            return Err(CoreError::invalid("dual state needs a window of at least two measures"));
        }
        Ok(Self { potentials: vec![vec![0.0; n]; m - 1] })
    }

    pub fn blocks(&self) -> usize {
        self.potentials.len()
    }

    /// The implicit last potential `λ^m = −Σ_{k<m} λ^k`.
    pub fn last_potential(&self) -> Vec<f64> {
        let n = self.potentials[0].len();
        let mut last = vec![0.0; n];
        for block in &self.potentials {
            for (s, v) in last.iter_mut().zip(block) {
                *s -= v;
            }
        }
        last
    }

    fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.blocks() * self.potentials[0].len());
        for block in &self.potentials {
            flat.extend_from_slice(block);
        }
        flat
    }

    fn from_flat(flat: &[f64], blocks: usize, n: usize) -> Self {
        let potentials = (0..blocks).map(|k| flat[k * n..(k + 1) * n].to_vec()).collect();
        Self { potentials }
    }
}

/// Value and flattened gradient of the dual objective
/// `Σ_{k<m} H*_k(λ^k) + H*_m(−Σ λ^k)`; everything is closed-form.
pub fn dual_objective(problem: &BarycenterProblem, state: &DualState) -> Result<(f64, Vec<f64>)> {
    let m = problem.m();
    let n = problem.n();
    if state.blocks() != m - 1 {
        return Err(CoreError::DimensionMismatch {
            expected: m - 1,
            found: state.blocks(),
            what: "dual state blocks",
        });
    }
    let last = state.last_potential();
    // Terms k = 0..m-2 plus the implicit last one, evaluated independently.
    let values = map_terms(m, |k| -> Result<(f64, ProbabilityVector)> {
        let lambda = if k + 1 == m { &last } else { &state.potentials[k] };
        let v = semidual_value(lambda, &problem.measures[k], &problem.cost, problem.gamma)?;
        let g = semidual_gradient(lambda, &problem.measures[k], &problem.cost, problem.gamma)?;
        Ok((v, g))
    })?;
    let mut value = 0.0;
    for (v, _) in &values {
        value += v;
    }
    let last_grad = values[m - 1].1.as_slice().to_vec();
    let mut grad = vec![0.0; (m - 1) * n];
    for k in 0..m - 1 {
        let block = &mut grad[k * n..(k + 1) * n];
        for (i, g) in block.iter_mut().enumerate() {
            *g = values[k].1.get(i) - last_grad[i];
        }
    }
    Ok((value, grad))
}

/// Dual barycenter result.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub state: DualState,
    /// Average of the `m` conjugate-gradient recoveries, renormalized.
    pub barycenter: ProbabilityVector,
    /// All `m` individual recoveries `∇H*_k(λ^k)`.
    pub recovered: Vec<ProbabilityVector>,
    /// Largest pairwise ∞-distance between recoveries.
    pub recovery_spread: f64,
    /// Minimized dual value; the primal optimum is its negative.
    pub dual_objective: f64,
    pub converged: bool,
    pub run: RunHistory,
}

/// Solve the dual problem from the zero state.
pub fn solve_dual(problem: &BarycenterProblem, eps: f64) -> Result<DualSolution> {
    if problem.m() == 1 {
        return single_measure_solution(problem);
    }
    let start = DualState::zeros(problem.m(), problem.n())?;
    solve_dual_warm(problem, eps, &start)
}

/// Solve the dual problem from a supplied starting state (sliding-window
/// warm starts).
pub fn solve_dual_warm(
    problem: &BarycenterProblem,
    eps: f64,
    start: &DualState,
) -> Result<DualSolution> {
    let m = problem.m();
    let n = problem.n();
    if m == 1 {
        return single_measure_solution(problem);
    }
    if start.blocks() != m - 1 {
        return Err(CoreError::DimensionMismatch {
            expected: m - 1,
            found: start.blocks(),
            what: "warm-start blocks",
        });
    }
    let dim = (m - 1) * n;
    let mut oracle = ExactOracle::new(dim, |flat: &[f64]| {
        let state = DualState::from_flat(flat, m - 1, n);
        // Closed-form terms cannot fail on finite iterates.
        dual_objective(problem, &state).expect("dual objective evaluation")
    });
    let prox = ProxSetup::EuclideanFree { dim };
    let run = universal_method(
        &mut oracle,
        &prox,
        &start.flatten(),
        eps,
        MethodOrder::Accelerated,
        DEFAULT_MAX_OUTER,
    )?;
    let state = DualState::from_flat(&run.point, m - 1, n);
    let (dual_value, _) = dual_objective(problem, &state)?;
    let last = state.last_potential();
    let recovered = map_terms(m, |k| {
        let lambda = if k + 1 == m { &last } else { &state.potentials[k] };
        semidual_gradient(lambda, &problem.measures[k], &problem.cost, problem.gamma)
    })?;
    let mut avg = vec![0.0; n];
    for r in &recovered {
        math::axpy(1.0 / m as f64, r.as_slice(), &mut avg);
    }
    let barycenter = ProbabilityVector::new(avg)?;
    let mut spread = 0.0f64;
    for a in 0..m {
        for b in a + 1..m {
            let d = math::norm_inf(&math::sub(recovered[a].as_slice(), recovered[b].as_slice()));
            spread = spread.max(d);
        }
    }
    Ok(DualSolution {
        state,
        barycenter,
        recovered,
        recovery_spread: spread,
        dual_objective: dual_value,
        converged: run.converged,
        run: run.history,
    })
}

fn single_measure_solution(problem: &BarycenterProblem) -> Result<DualSolution> {
    let w = problem.measures[0].clone();
    Ok(DualSolution {
        state: DualState { potentials: Vec::new() },
        barycenter: w.clone(),
        recovered: vec![w],
        recovery_spread: 0.0,
        dual_objective: 0.0,
        converged: true,
        run: RunHistory {
            records: Vec::new(),
            iterations: 0,
            oracle_calls: 0,
            weighted_point_average: Vec::new(),
            weighted_gradient_average: Vec::new(),
            final_gap: 0.0,
        },
    })
}

/// Shift the window by `r` measures: drop the first `r` potentials and fill
/// the freed trailing slots with copies of the implicit last potential,
/// re-expressed in the `(m−1)`-block parameterization.
pub fn warm_start_shift(state: &DualState, r: usize) -> Result<DualState> {
    let m = state.blocks() + 1;
    if r >= m {
        return Err(CoreError::invalid(alloc::format!(
            "shift {r} must be smaller than the window size {m}"
        )));
    }
    if r == 0 {
        return Ok(state.clone());
    }
    let last = state.last_potential();
    let mut potentials: Vec<Vec<f64>> = state.potentials[r..].to_vec();
    while potentials.len() < m - 1 {
        potentials.push(last.clone());
    }
    Ok(DualState { potentials })
}
