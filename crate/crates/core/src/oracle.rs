//! Inexact first-order oracles with certified accuracy constants.
//!
//! An oracle reply `(F, G)` at `y` with constants `(δ, L)` brackets the true
//! objective from both sides:
//!
//! ```text
//! 0 ≤ f(y') − F − ⟨G, y' − y⟩ ≤ (L/2)‖y' − y‖² + δ    for all y'.
//! ```
//!
//! This module wraps approximately solved inner problems into such oracles,
//! provides the residual-based certificate that the balancing solver uses to
//! stop, the Hölder-to-smooth embedding for subgradient-only objectives, and
//! a sampling check of the bracket against a trusted reference.

use alloc::vec::Vec;
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::math::{self, SeededSampler};
use crate::ot::{marginal_residual, plan_from_duals, DualPotentials};
use crate::types::{CostMatrix, ProbabilityVector};
use crate::universal::MethodOrder;

/// Where a pair of declared constants comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Exactly feasible primal solution: `(δ, 2·max c)`.
    Proposition2,
    /// Certified dual solution of a jointly smooth saddle: `(6δ, 2L)`.
    Proposition3,
    /// Subgradient path embedded into the smooth class at `ν = 0`.
    HolderEmbedding,
    User,
}

/// Declared accuracy constants of an oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConstants {
    pub delta: f64,
    pub lipschitz: f64,
    pub provenance: Provenance,
}

impl OracleConstants {
    pub fn new(delta: f64, lipschitz: f64, provenance: Provenance) -> Result<Self> {
        if delta < 0.0 || !delta.is_finite() {
            return Err(CoreError::invalid("delta must be nonnegative and finite"));
        }
        if lipschitz <= 0.0 || !lipschitz.is_finite() {
            return Err(CoreError::invalid("lipschitz constant must be positive and finite"));
        }
        Ok(Self { delta, lipschitz, provenance })
    }
}

/// One oracle reply: approximate value, approximate gradient, and the
/// constants the pair is certified for. `lipschitz` is `None` when no bound
/// is declared.
#[derive(Debug, Clone)]
pub struct OracleReply {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub delta: f64,
    pub lipschitz: Option<f64>,
    pub provenance: Provenance,
}

/// An inexact first-order oracle. `delta` is the accuracy the caller wants
/// this particular reply certified for; exact oracles ignore it.
pub trait FirstOrderOracle {
    fn dimension(&self) -> usize;
    fn evaluate(&mut self, point: &[f64], delta: f64) -> Result<OracleReply>;
}

/// Exact oracle built from a value-and-gradient closure; `δ = 0`.
pub struct ExactOracle<F> {
    dim: usize,
    f: F,
    lipschitz: Option<f64>,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> ExactOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, lipschitz: None }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> FirstOrderOracle for ExactOracle<F> {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn evaluate(&mut self, point: &[f64], _delta: f64) -> Result<OracleReply> {
        let (value, gradient) = (self.f)(point);
        Ok(OracleReply { value, gradient, delta: 0.0, lipschitz: self.lipschitz, provenance: Provenance::User })
    }
}

/// Smoothing constant for a `ν`-Hölder gradient embedded into the smooth
/// class at slack `δ`:
///
/// ```text
/// L = L_ν · [ L_ν (1 − ν) / (2δ(1 + ν)) ]^((1−ν)/(1+ν))
/// ```
///
/// At `ν = 1` the exponent vanishes and `L_ν` is returned exactly; at
/// `ν = 0` the formula degenerates to `L₀²/(2δ)`.
pub fn holder_smoothing_constant(l_nu: f64, nu: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(CoreError::invalid("holder exponent must lie in [0, 1]"));
    }
    if l_nu <= 0.0 || !l_nu.is_finite() {
        return Err(CoreError::invalid("holder constant must be positive and finite"));
    }
    if delta <= 0.0 || !delta.is_finite() {
        return Err(CoreError::invalid("delta must be positive and finite"));
    }
    if nu == 1.0 {
        return Ok(l_nu);
    }
    let base = l_nu * (1.0 - nu) / (2.0 * delta * (1.0 + nu));
    Ok(l_nu * base.powf((1.0 - nu) / (1.0 + nu)))
}

/// The two inequalities of the inner stopping criterion, as a pure decision
/// on already-measured quantities:
/// `residual · dual_norm ≤ δ/2` and `residual ≤ δ`.
pub fn certificate_decision(residual: f64, dual_norm: f64, delta: f64) -> bool {
    residual * dual_norm <= delta / 2.0 && residual <= delta
}

/// Measured quantities behind a stop decision, kept for logging.
#[derive(Debug, Clone, Copy)]
pub struct CertificateCheck {
    pub satisfied: bool,
    /// `‖Ax − b‖₂` of the plan recomputed from the potentials.
    pub residual: f64,
    /// `‖(λ, μ)‖₂` on the canonical (zero-mean `λ`) representative.
    pub dual_norm: f64,
    /// Left-hand side `residual · dual_norm` of the first inequality.
    pub weighted_residual: f64,
}

/// Evaluate the inner stopping criterion at accuracy `delta`.
///
/// The plan is recomputed from the potentials, so the check cannot drift
/// from the iterate it certifies.
pub fn inner_stop_criterion(
    duals: &DualPotentials,
    cost: &CostMatrix,
    l: &ProbabilityVector,
    w: &ProbabilityVector,
    gamma: f64,
    delta: f64,
) -> Result<CertificateCheck> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(CoreError::invalid("delta must be positive and finite"));
    }
    let plan = plan_from_duals(duals, cost, gamma)?;
    let residual = marginal_residual(plan.entries(), l, w).norm;
    let dual_norm = duals.canonical_norm();
    Ok(CertificateCheck {
        satisfied: certificate_decision(residual, dual_norm, delta),
        residual,
        dual_norm,
        weighted_residual: residual * dual_norm,
    })
}

/// Accuracy requested from the oracle at outer iteration `k` when the target
/// accuracy is `eps`: `0.1·eps` for the plain method and `0.1·eps/(k+1)` for
/// the accelerated one, whose error accumulation grows with the iteration
/// count.
pub fn delta_schedule(eps: f64, order: MethodOrder, iteration: usize) -> f64 {
    const SCALE: f64 = 0.1;
    match order {
        MethodOrder::Plain => SCALE * eps,
        MethodOrder::Accelerated => SCALE * eps / (iteration + 1) as f64,
    }
}

/// An inner problem that can be solved at a requested certificate accuracy,
/// reporting the outer value and outer gradient at its approximate solution.
pub trait InnerProblem {
    fn dimension(&self) -> usize;
    fn solve_inner(&mut self, point: &[f64], delta: f64) -> Result<InnerSolution>;
}

/// What an inner solve hands back: the joint objective and its outer-variable
/// gradient at the certified inner point.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub objective: f64,
    pub gradient: Vec<f64>,
    /// The certificate level the inner solve actually achieved (≤ requested).
    pub certified_delta: f64,
}

/// How inner solutions translate into declared oracle constants.
#[derive(Debug, Clone, Copy)]
pub enum OracleMode {
    /// Jointly smooth saddle with certified dual solutions. The reply is
    /// `(Φ(x̃,y) − 2δ, Φ_y(x̃,y))` with constants `(6δ, 2L)`.
    SmoothSaddle { lipschitz: Option<f64> },
    /// Exactly feasible primal solution within `δ` of the optimal value;
    /// constants `(δ, 2·max c)`.
    ExactPrimal { cost_bound: f64 },
    /// Only a `δ`-subgradient is available. The value is lowered by `δ` so
    /// the reply stays a true minorant, and the declared curvature comes
    /// from the `ν = 0` embedding when a subgradient-difference bound is
    /// known. Declared slack: `3δ` (inner `2δ` plus embedding `δ`).
    Subgradient { gradient_bound: Option<f64> },
}

/// Wrap an inner solver into an inexact oracle.
pub struct InexactOracle<P> {
    inner: P,
    mode: OracleMode,
    default_delta: f64,
}

/// Build the oracle `y ↦ (F, G)` from an inner-problem handle.
/// `delta` is the default certificate accuracy used by [`InexactOracle::reply`];
/// schedule-driven callers pass their own per-call accuracy instead.
pub fn make_inexact_oracle<P: InnerProblem>(
    inner: P,
    mode: OracleMode,
    delta: f64,
) -> Result<InexactOracle<P>> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(CoreError::invalid("delta must be positive and finite"));
    }
    Ok(InexactOracle { inner, mode, default_delta: delta })
}

impl<P: InnerProblem> InexactOracle<P> {
    /// Evaluate at the default accuracy.
    pub fn reply(&mut self, point: &[f64]) -> Result<OracleReply> {
        self.evaluate(point, self.default_delta)
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut P {
        &mut self.inner
    }
}

impl<P: InnerProblem> FirstOrderOracle for InexactOracle<P> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn evaluate(&mut self, point: &[f64], delta: f64) -> Result<OracleReply> {
        if delta <= 0.0 || !delta.is_finite() {
            return Err(CoreError::invalid("delta must be positive and finite"));
        }
        let sol = self.inner.solve_inner(point, delta)?;
        let d = sol.certified_delta.max(f64::MIN_POSITIVE);
        let reply = match self.mode {
            OracleMode::SmoothSaddle { lipschitz } => OracleReply {
                value: sol.objective - 2.0 * d,
                gradient: sol.gradient,
                delta: 6.0 * d,
                lipschitz: lipschitz.map(|l| 2.0 * l),
                provenance: Provenance::Proposition3,
            },
            OracleMode::ExactPrimal { cost_bound } => OracleReply {
                value: sol.objective,
                gradient: sol.gradient,
                delta: d,
                lipschitz: Some(2.0 * cost_bound),
                provenance: Provenance::Proposition2,
            },
            OracleMode::Subgradient { gradient_bound } => {
                let lipschitz = match gradient_bound {
                    Some(b) => Some(holder_smoothing_constant(b, 0.0, d)?),
                    None => None,
                };
                OracleReply {
                    value: sol.objective - d,
                    gradient: sol.gradient,
                    delta: 3.0 * d,
                    lipschitz,
                    provenance: Provenance::HolderEmbedding,
                }
            }
        };
        Ok(reply)
    }
}

/// Axis-aligned box from which probe points are drawn.
#[derive(Debug, Clone)]
pub struct SamplingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SamplingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(CoreError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
                what: "box bounds",
            });
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(CoreError::invalid("box must have positive extent in every coordinate"));
        }
        Ok(Self { lower, upper })
    }

    fn sample(&self, rng: &mut SeededSampler) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(&a, &b)| rng.uniform(a, b)).collect()
    }
}

/// Result of sampling the Definition-1 bracket.
#[derive(Debug, Clone, Copy)]
pub struct InequalityCheck {
    /// Fraction of probe pairs satisfying both inequalities.
    pub pass_fraction: f64,
    /// Largest additive violation of either inequality (0 when all pass).
    pub worst_violation: f64,
}

/// Sample `(y, y')` pairs from `region` and check both sides of the bracket
/// against `f_reference`, which must be computed far more accurately than
/// the oracle's `delta`.
///
/// The reply must declare a Lipschitz constant, otherwise the upper side is
/// unverifiable. A relative slack of a few machine epsilons keeps exact
/// oracles (where the upper side holds with equality) at pass fraction 1.
pub fn check_oracle_inequality(
    oracle: &mut dyn FirstOrderOracle,
    f_reference: &mut dyn FnMut(&[f64]) -> f64,
    region: &SamplingBox,
    samples: usize,
    delta: f64,
    seed: u64,
) -> Result<InequalityCheck> {
    let dim = oracle.dimension();
    if region.lower.len() != dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            found: region.lower.len(),
            what: "sampling box dimension",
        });
    }
    if samples == 0 {
        return Err(CoreError::invalid("need at least one sample"));
    }
    let mut rng = SeededSampler::new(seed);
    let mut passed = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let y = region.sample(&mut rng);
        let y_probe = region.sample(&mut rng);
        let reply = oracle.evaluate(&y, delta)?;
        let lipschitz = reply.lipschitz.ok_or_else(|| {
            CoreError::invalid("oracle reply declares no Lipschitz constant; bracket unverifiable")
        })?;
        let step = math::sub(&y_probe, &y);
        let gap = f_reference(&y_probe) - reply.value - math::dot(&reply.gradient, &step);
        let bound = 0.5 * lipschitz * math::dot(&step, &step) + reply.delta;
        let slack = 1e-12 * (1.0 + reply.value.abs() + bound.abs());
        let lower_violation = -gap;
        let upper_violation = gap - bound;
        if lower_violation <= slack && upper_violation <= slack {
            passed += 1;
        }
        worst = worst.max(lower_violation).max(upper_violation);
    }
    Ok(InequalityCheck {
        pass_fraction: passed as f64 / samples as f64,
        worst_violation: worst.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::{solve_entropic_ot, SolverOptions, StoppingRule};
    use crate::types::Matrix;
    use alloc::vec;

    #[test]
    fn holder_constant_examples() {
        assert_eq!(holder_smoothing_constant(2.0, 1.0, 0.1).unwrap(), 2.0);
        assert!((holder_smoothing_constant(3.0, 0.0, 0.5).unwrap() - 9.0).abs() < 1e-12);
        let v = holder_smoothing_constant(1.0, 0.5, 1.0).unwrap();
        assert!((v - (1.0f64 / 6.0).powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((v - 0.55032).abs() < 1e-5);
    }

    #[test]
    fn holder_constant_monotone_in_delta_and_continuous_in_nu() {
        let mut last = f64::INFINITY;
        for delta in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
            let v = holder_smoothing_constant(2.0, 0.3, delta).unwrap();
            assert!(v <= last);
            last = v;
        }
        // Continuity at ν = 1: approaching from below converges to L_ν.
        let near = holder_smoothing_constant(2.0, 1.0 - 1e-9, 0.1).unwrap();
        assert!((near - 2.0).abs() < 1e-6);
        assert!(holder_smoothing_constant(2.0, 1.2, 0.1).is_err());
        assert!(holder_smoothing_constant(2.0, -0.1, 0.1).is_err());
    }

    #[test]
    fn certificate_decision_arithmetic() {
        // residual 0.1, ‖(λ,μ)‖ = 10, δ = 0.5: 1.0 > 0.25 → reject.
        assert!(!certificate_decision(0.1, 10.0, 0.5));
        // residual 0.1, ‖(λ,μ)‖ = 1, δ = 0.5: 0.1 ≤ 0.25 and 0.1 ≤ 0.5 → accept.
        assert!(certificate_decision(0.1, 1.0, 0.5));
        // exact marginals always pass
        assert!(certificate_decision(0.0, 123.0, 1e-9));
    }

    #[test]
    fn inner_criterion_on_converged_solve() {
        let mut rng = crate::math::SeededSampler::new(6);
        let n = 4;
        let cost = CostMatrix::new(Matrix::from_fn(n, n, |_, _| rng.next_f64())).unwrap();
        let l = ProbabilityVector::uniform(n);
        let w = ProbabilityVector::new((0..n).map(|_| 0.3 + rng.next_f64()).collect()).unwrap();
        let report = solve_entropic_ot(
            &cost,
            &l,
            &w,
            1.0,
            &SolverOptions::with_stop(StoppingRule::OracleCertificate(1e-6)),
        )
        .unwrap();
        assert!(report.converged);
        let check = inner_stop_criterion(&report.duals, &cost, &l, &w, 1.0, 1e-6).unwrap();
        assert!(check.satisfied);
        assert!(check.residual <= 1e-6);
        assert!(check.weighted_residual <= 5e-7);
    }

    /// Quadratic saddle Φ(x, y) = ½‖x‖² + ½‖y‖² + q⟨x, y⟩ with closed-form
    /// inner minimizer x*(y) = −q·y and φ(y) = ½(1 − q²)‖y‖².
    struct QuadraticSaddle {
        q: f64,
        dim: usize,
        /// Relative size of the controlled perturbation of x*.
        off: f64,
    }

    impl InnerProblem for QuadraticSaddle {
        fn dimension(&self) -> usize {
            self.dim
        }

        fn solve_inner(&mut self, y: &[f64], delta: f64) -> Result<InnerSolution> {
            // x̃ = x* + e with ‖e‖ small relative to δ; Φ is 1-strongly convex
            // in x, so Φ(x̃,y) − φ(y) = ½‖e‖² ≤ δ for the sizes used here.
            let e = self.off * delta.min(1.0);
            let x: Vec<f64> = y.iter().map(|v| -self.q * v + e).collect();
            let phi = 0.5 * math::dot(&x, &x)
                + 0.5 * math::dot(y, y)
                + self.q * math::dot(&x, y);
            let grad: Vec<f64> = y.iter().zip(&x).map(|(v, xi)| v + self.q * xi).collect();
            Ok(InnerSolution { objective: phi, gradient: grad, certified_delta: delta })
        }
    }

    #[test]
    fn exact_inner_solve_reproduces_truth_up_to_offset() {
        let delta = 1e-12;
        let mut oracle = make_inexact_oracle(
            QuadraticSaddle { q: 0.1, dim: 2, off: 0.0 },
            OracleMode::SmoothSaddle { lipschitz: Some(1.1) },
            delta,
        )
        .unwrap();
        let y = [0.4, -0.3];
        let reply = oracle.reply(&y).unwrap();
        let truth = 0.5 * (1.0 - 0.01) * math::dot(&y, &y);
        assert!((reply.value - (truth - 2.0 * delta)).abs() < 1e-13);
        let g_truth: Vec<f64> = y.iter().map(|v| (1.0 - 0.01) * v).collect();
        for i in 0..2 {
            assert!((reply.gradient[i] - g_truth[i]).abs() < 1e-12);
        }
        assert_eq!(reply.provenance, Provenance::Proposition3);
        assert_eq!(reply.delta, 6.0 * delta);
        assert_eq!(reply.lipschitz, Some(2.2));
    }

    #[test]
    fn exact_primal_mode_declares_proposition_2_constants() {
        struct Trivial;
        impl InnerProblem for Trivial {
            fn dimension(&self) -> usize {
                1
            }
            fn solve_inner(&mut self, _y: &[f64], delta: f64) -> Result<InnerSolution> {
                Ok(InnerSolution { objective: 0.0, gradient: vec![0.0], certified_delta: delta })
            }
        }
        let max_cost = 0.75;
        let mut oracle =
            make_inexact_oracle(Trivial, OracleMode::ExactPrimal { cost_bound: max_cost }, 1e-3)
                .unwrap();
        let reply = oracle.reply(&[0.0]).unwrap();
        assert_eq!(reply.delta, 1e-3);
        assert_eq!(reply.lipschitz, Some(2.0 * max_cost));
        assert_eq!(reply.provenance, Provenance::Proposition2);
    }

    #[test]
    fn quadratic_saddle_bracket_holds_on_sampled_pairs() {
        let q = 0.1;
        let delta = 1e-6;
        let mut oracle = make_inexact_oracle(
            QuadraticSaddle { q, dim: 2, off: 1e-3 },
            OracleMode::SmoothSaddle { lipschitz: Some(1.0 + q) },
            delta,
        )
        .unwrap();
        let box_ = SamplingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let mut truth = |y: &[f64]| 0.5 * (1.0 - q * q) * math::dot(y, y);
        let check =
            check_oracle_inequality(&mut oracle, &mut truth, &box_, 1000, delta, 99).unwrap();
        assert_eq!(check.pass_fraction, 1.0, "worst violation {:e}", check.worst_violation);
    }

    #[test]
    fn exact_oracle_with_true_curvature_passes_and_understated_fails() {
        let f = |y: &[f64]| (0.5 * math::dot(y, y), y.to_vec());
        let box_ = SamplingBox::new(vec![-2.0], vec![2.0]).unwrap();
        let mut truth = |y: &[f64]| 0.5 * math::dot(y, y);

        let mut honest = ExactOracle::new(1, f).with_lipschitz(1.0);
        let ok = check_oracle_inequality(&mut honest, &mut truth, &box_, 500, 1e-9, 1).unwrap();
        assert_eq!(ok.pass_fraction, 1.0);

        let mut understated = ExactOracle::new(1, f).with_lipschitz(0.5);
        let bad =
            check_oracle_inequality(&mut understated, &mut truth, &box_, 500, 1e-9, 1).unwrap();
        assert!(bad.pass_fraction < 1.0);
        assert!(bad.worst_violation > 0.0);
    }

    #[test]
    fn schedule_decays_only_for_accelerated_order() {
        let eps = 1e-2;
        assert_eq!(delta_schedule(eps, MethodOrder::Plain, 0), 1e-3);
        assert_eq!(delta_schedule(eps, MethodOrder::Plain, 99), 1e-3);
        assert_eq!(delta_schedule(eps, MethodOrder::Accelerated, 0), 1e-3);
        assert!((delta_schedule(eps, MethodOrder::Accelerated, 9) - 1e-4).abs() < 1e-18);
    }
}
