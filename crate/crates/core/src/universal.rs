//! Universal gradient methods driven by inexact oracles.
//!
//! Two members of the family are exposed: the plain universal gradient
//! method and the accelerated (similar-triangles) variant. Neither takes a
//! Lipschitz or Hölder constant: local curvature is found by a
//! doubling/halving line search whose acceptance test carries an
//! `ε`-dependent slack, which is what lets the same loop run on smooth,
//! Hölder, and plainly nonsmooth objectives at their respective optimal
//! rates.
//!
//! Termination is by a model-gap certificate. Every accepted reply
//! contributes the affine minorant `F + ⟨G, u − x⟩` to an aggregate lower
//! model; the gap between the best value seen and the prox-regularized
//! minimum of the aggregate bounds the suboptimality up to a term that
//! vanishes with the accumulated step weight, and is computable in closed
//! form for each prox structure.

use alloc::vec;
use alloc::vec::Vec;
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::math::{self, log_sum_exp_by};
use crate::oracle::{delta_schedule, FirstOrderOracle, OracleReply};

/// Family parameter: `Plain` is the non-accelerated method (choose it when
/// no smoothness is expected), `Accelerated` the fast variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodOrder {
    Plain,
    Accelerated,
}

/// Prox structure: which geometry steps and distances are measured in.
#[derive(Debug, Clone, PartialEq)]
pub enum ProxSetup {
    /// Unconstrained Euclidean geometry.
    EuclideanFree { dim: usize },
    /// Box `y ≥ lower` with Euclidean geometry.
    EuclideanBox { lower: Vec<f64> },
    /// Probability simplex with the entropy prox (multiplicative updates);
    /// distances in the 1-norm. Iterates stay strictly positive.
    EntropicSimplex { dim: usize },
}

/// Iterates are clamped to at least this mass per coordinate on the simplex
/// so logarithms stay finite.
const SIMPLEX_FLOOR: f64 = 1e-300;

impl ProxSetup {
    pub fn dim(&self) -> usize {
        match self {
            ProxSetup::EuclideanFree { dim } | ProxSetup::EntropicSimplex { dim } => *dim,
            ProxSetup::EuclideanBox { lower } => lower.len(),
        }
    }

    /// Validate a starting point; the simplex case renormalizes small drift.
    fn feasible_start(&self, y0: &[f64]) -> Result<Vec<f64>> {
        if y0.len() != self.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim(),
                found: y0.len(),
                what: "starting point",
            });
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::invalid("starting point must be finite"));
        }
        match self {
            ProxSetup::EuclideanFree { .. } => Ok(y0.to_vec()),
            ProxSetup::EuclideanBox { lower } => {
                if y0.iter().zip(lower).any(|(v, lo)| v < lo) {
                    return Err(CoreError::invalid("starting point below the box lower bound"));
                }
                Ok(y0.to_vec())
            }
            ProxSetup::EntropicSimplex { .. } => {
                let sum: f64 = y0.iter().sum();
                if y0.iter().any(|&v| v <= 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return Err(CoreError::invalid(
                        "starting point must be strictly positive and sum to 1",
                    ));
                }
                Ok(y0.iter().map(|v| v / sum).collect())
            }
        }
    }

    /// Squared prox norm of a displacement (2-norm squared for Euclidean
    /// structures, 1-norm squared on the simplex).
    fn norm_sq(&self, d: &[f64]) -> f64 {
        match self {
            ProxSetup::EntropicSimplex { .. } => {
                let n1 = math::norm1(d);
                n1 * n1
            }
            _ => math::dot(d, d),
        }
    }

    /// Bregman distance `V(anchor, z)` of the prox structure.
    fn bregman(&self, anchor: &[f64], z: &[f64]) -> f64 {
        match self {
            ProxSetup::EntropicSimplex { .. } => z
                .iter()
                .zip(anchor)
                .map(|(&b, &a)| if b > 0.0 { b * (b / a).ln() } else { 0.0 })
                .sum(),
            _ => {
                let d = math::sub(z, anchor);
                0.5 * math::dot(&d, &d)
            }
        }
    }

    /// Closed-form minimum over the feasible set of
    /// `V(anchor, u) + ⟨shift, u⟩ + constant`.
    fn min_aggregate(&self, anchor: &[f64], shift: &[f64], constant: f64) -> f64 {
        match self {
            ProxSetup::EuclideanFree { .. } => {
                constant + math::dot(shift, anchor) - 0.5 * math::dot(shift, shift)
            }
            ProxSetup::EuclideanBox { lower } => {
                let u: Vec<f64> = anchor
                    .iter()
                    .zip(shift)
                    .zip(lower)
                    .map(|((&a, &s), &lo)| (a - s).max(lo))
                    .collect();
                self.bregman(anchor, &u) + math::dot(shift, &u) + constant
            }
            ProxSetup::EntropicSimplex { dim } => {
                constant - log_sum_exp_by(*dim, |i| anchor[i].ln() - shift[i])
            }
        }
    }
}

/// One Bregman prox step: `argmin_z { step·⟨g, z⟩ + V(y, z) }`.
///
/// Euclidean free: `y − step·g`; box: the same clamped to the lower bound;
/// simplex: the multiplicative-weights update `y_i·exp(−step·g_i)`
/// renormalized, computed in log domain.
pub fn prox_step(prox: &ProxSetup, y: &[f64], g: &[f64], step: f64) -> Vec<f64> {
    debug_assert_eq!(y.len(), g.len());
    match prox {
        ProxSetup::EuclideanFree { .. } => {
            y.iter().zip(g).map(|(&v, &gi)| v - step * gi).collect()
        }
        ProxSetup::EuclideanBox { lower } => y
            .iter()
            .zip(g)
            .zip(lower)
            .map(|((&v, &gi), &lo)| (v - step * gi).max(lo))
            .collect(),
        ProxSetup::EntropicSimplex { dim } => {
            let mut logits: Vec<f64> = y.iter().zip(g).map(|(&v, &gi)| v.ln() - step * gi).collect();
            let m = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let mut sum = 0.0;
            for l in logits.iter_mut() {
                *l = (*l - m).exp();
                sum += *l;
            }
            let mut out: Vec<f64> = logits.iter().map(|&w| (w / sum).max(SIMPLEX_FLOOR)).collect();
            let s: f64 = out.iter().sum();
            for v in out.iter_mut() {
                *v /= s;
            }
            debug_assert_eq!(out.len(), *dim);
            out
        }
    }
}

/// Per-iteration trace of a universal-method run.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Best objective estimate after this iteration (non-increasing).
    pub objective_estimate: f64,
    /// Accepted local curvature estimate.
    pub curvature: f64,
    /// Oracle accuracy requested this iteration.
    pub delta: f64,
    /// Model-gap certificate after this iteration.
    pub gap: f64,
}

/// Full run record, including the primal-dual averages of the query points
/// and oracle gradients accumulated with the method's own step weights.
#[derive(Debug, Clone)]
pub struct RunHistory {
    pub records: Vec<IterationRecord>,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub weighted_point_average: Vec<f64>,
    pub weighted_gradient_average: Vec<f64>,
    pub final_gap: f64,
}

/// Output of [`universal_method`].
#[derive(Debug, Clone)]
pub struct UniversalRun {
    /// Best evaluated point.
    pub point: Vec<f64>,
    /// Oracle value at the best point.
    pub value: f64,
    /// Whether the gap certificate reached the target before `max_iter`.
    pub converged: bool,
    pub history: RunHistory,
}

const INITIAL_CURVATURE: f64 = 1.0;
const MIN_CURVATURE: f64 = 1e-12;
const MAX_DOUBLINGS: u32 = 60;

struct Aggregate {
    /// Σ a_i G_i
    shift: Vec<f64>,
    /// Σ a_i (F_i − ⟨G_i, x_i⟩)
    constant: f64,
    /// Σ a_i
    weight: f64,
    /// Σ a_i x_i
    point_sum: Vec<f64>,
}

impl Aggregate {
    fn new(dim: usize) -> Self {
        Self { shift: vec![0.0; dim], constant: 0.0, weight: 0.0, point_sum: vec![0.0; dim] }
    }

    fn push(&mut self, a: f64, x: &[f64], reply: &OracleReply) {
        math::axpy(a, &reply.gradient, &mut self.shift);
        self.constant += a * (reply.value - math::dot(&reply.gradient, x));
        self.weight += a;
        math::axpy(a, x, &mut self.point_sum);
    }

    /// Certificate: the raw model gap (best value minus the normalized
    /// prox-regularized minimum of the aggregated lower model, clamped at
    /// zero) plus the normalized prox distance from the anchor to the
    /// current prox center. The raw gap alone understates the error while
    /// the accumulated weight is small — the prox term in the aggregate can
    /// push its minimum above the optimum. The distance term is the
    /// computable stand-in for that bias; it decays like `1/Σa_i`, the same
    /// rate the worst-case error bound does, so stopping when the sum
    /// reaches `ε` preserves the method's iteration order.
    fn gap(&self, prox: &ProxSetup, anchor: &[f64], center: &[f64], best: f64) -> f64 {
        if self.weight == 0.0 {
            return f64::INFINITY;
        }
        let model_min = prox.min_aggregate(anchor, &self.shift, self.constant);
        let raw = best - model_min / self.weight;
        raw.max(0.0) + prox.bregman(anchor, center) / self.weight
    }
}

struct Best {
    point: Vec<f64>,
    value: f64,
}

impl Best {
    fn offer(&mut self, point: &[f64], value: f64) {
        if value < self.value {
            self.value = value;
            self.point = point.to_vec();
        }
    }
}

/// Minimize a convex objective through an inexact first-order oracle.
///
/// Stops when the model-gap certificate reaches `eps` or after `max_iter`
/// accepted iterations; the only failure mode is a line search that cannot
/// find a finite curvature within 60 doublings.
pub fn universal_method(
    oracle: &mut dyn FirstOrderOracle,
    prox: &ProxSetup,
    y0: &[f64],
    eps: f64,
    order: MethodOrder,
    max_iter: usize,
) -> Result<UniversalRun> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(CoreError::invalid("eps must be positive and finite"));
    }
    if oracle.dimension() != prox.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: prox.dim(),
            found: oracle.dimension(),
            what: "oracle dimension",
        });
    }
    let start = prox.feasible_start(y0)?;
    match order {
        MethodOrder::Plain => run_plain(oracle, prox, start, eps, max_iter),
        MethodOrder::Accelerated => run_accelerated(oracle, prox, start, eps, max_iter),
    }
}

fn acceptance_holds(
    candidate_value: f64,
    base: &OracleReply,
    displacement_sq: f64,
    inner: f64,
    curvature: f64,
    eps_slack: f64,
) -> bool {
    let rhs = base.value
        + inner
        + 0.5 * curvature * displacement_sq
        + eps_slack
        + base.delta
        + 1e-15 * (1.0 + base.value.abs());
    candidate_value <= rhs
}

fn run_plain(
    oracle: &mut dyn FirstOrderOracle,
    prox: &ProxSetup,
    start: Vec<f64>,
    eps: f64,
    max_iter: usize,
) -> Result<UniversalRun> {
    let dim = prox.dim();
    let mut agg = Aggregate::new(dim);
    let mut records = Vec::new();
    let mut oracle_calls = 1usize;

    let mut x = start.clone();
    let mut reply = oracle.evaluate(&x, delta_schedule(eps, MethodOrder::Plain, 0))?;
    let mut best = Best { point: x.clone(), value: reply.value };
    let mut curvature = INITIAL_CURVATURE;
    let mut converged = false;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;

    while iterations < max_iter {
        let delta = delta_schedule(eps, MethodOrder::Plain, iterations);
        let mut trial = curvature;
        let mut accepted: Option<(Vec<f64>, OracleReply)> = None;
        for doubling in 0..=MAX_DOUBLINGS {
            let candidate = prox_step(prox, &x, &reply.gradient, 1.0 / trial);
            let candidate_reply = oracle.evaluate(&candidate, delta)?;
            oracle_calls += 1;
            let d = math::sub(&candidate, &x);
            let inner = math::dot(&reply.gradient, &d);
            if acceptance_holds(
                candidate_reply.value,
                &reply,
                prox.norm_sq(&d),
                inner,
                trial,
                eps / 2.0,
            ) {
                accepted = Some((candidate, candidate_reply));
                break;
            }
            if doubling == MAX_DOUBLINGS {
                break;
            }
            trial *= 2.0;
        }
        let (next, next_reply) = accepted.ok_or(CoreError::Divergence {
            iteration: iterations,
            curvature: trial,
            doublings: MAX_DOUBLINGS,
        })?;

        agg.push(1.0 / trial, &x, &reply);
        best.offer(&x, reply.value);
        best.offer(&next, next_reply.value);
        x = next;
        reply = next_reply;
        iterations += 1;
        gap = agg.gap(prox, &start, &x, best.value);
        records.push(IterationRecord {
            iteration: iterations,
            objective_estimate: best.value,
            curvature: trial,
            delta,
            gap,
        });
        curvature = (trial / 2.0).max(MIN_CURVATURE);
        if gap <= eps {
            converged = true;
            break;
        }
    }

    Ok(finish(agg, records, iterations, oracle_calls, best, converged, gap))
}

fn run_accelerated(
    oracle: &mut dyn FirstOrderOracle,
    prox: &ProxSetup,
    start: Vec<f64>,
    eps: f64,
    max_iter: usize,
) -> Result<UniversalRun> {
    let dim = prox.dim();
    let mut agg = Aggregate::new(dim);
    let mut records = Vec::new();
    let mut oracle_calls = 0usize;

    let mut prox_center = start.clone();
    let mut estimate = start.clone();
    let mut total_weight = 0.0f64;
    let mut best = Best { point: start.clone(), value: f64::INFINITY };
    let mut curvature = INITIAL_CURVATURE;
    let mut converged = false;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;

    while iterations < max_iter {
        let delta = delta_schedule(eps, MethodOrder::Accelerated, iterations);
        let mut trial = curvature;
        let mut accepted = None;
        for doubling in 0..=MAX_DOUBLINGS {
            // Positive root of  trial·a² = a + total_weight.
            let a = (1.0 + (1.0 + 4.0 * trial * total_weight).sqrt()) / (2.0 * trial);
            let weight_next = total_weight + a;
            let tau = a / weight_next;
            let query: Vec<f64> = prox_center
                .iter()
                .zip(&estimate)
                .map(|(&u, &y)| tau * u + (1.0 - tau) * y)
                .collect();
            let query_reply = oracle.evaluate(&query, delta)?;
            let center_next = prox_step(prox, &prox_center, &query_reply.gradient, a);
            let estimate_next: Vec<f64> = center_next
                .iter()
                .zip(&estimate)
                .map(|(&u, &y)| tau * u + (1.0 - tau) * y)
                .collect();
            let estimate_reply = oracle.evaluate(&estimate_next, delta)?;
            oracle_calls += 2;
            let d = math::sub(&estimate_next, &query);
            let inner = math::dot(&query_reply.gradient, &d);
            if acceptance_holds(
                estimate_reply.value,
                &query_reply,
                prox.norm_sq(&d),
                inner,
                trial,
                eps * tau / 2.0,
            ) {
                accepted = Some((a, query, query_reply, center_next, estimate_next, estimate_reply));
                break;
            }
            if doubling == MAX_DOUBLINGS {
                break;
            }
            trial *= 2.0;
        }
        let (a, query, query_reply, center_next, estimate_next, estimate_reply) =
            accepted.ok_or(CoreError::Divergence {
                iteration: iterations,
                curvature: trial,
                doublings: MAX_DOUBLINGS,
            })?;

        agg.push(a, &query, &query_reply);
        best.offer(&query, query_reply.value);
        best.offer(&estimate_next, estimate_reply.value);
        total_weight += a;
        prox_center = center_next;
        estimate = estimate_next;
        iterations += 1;
        gap = agg.gap(prox, &start, &prox_center, best.value);
        records.push(IterationRecord {
            iteration: iterations,
            objective_estimate: best.value,
            curvature: trial,
            delta,
            gap,
        });
        curvature = (trial / 2.0).max(MIN_CURVATURE);
        if gap <= eps {
            converged = true;
            break;
        }
    }

    Ok(finish(agg, records, iterations, oracle_calls, best, converged, gap))
}

fn finish(
    agg: Aggregate,
    records: Vec<IterationRecord>,
    iterations: usize,
    oracle_calls: usize,
    best: Best,
    converged: bool,
    gap: f64,
) -> UniversalRun {
    let w = if agg.weight > 0.0 { agg.weight } else { 1.0 };
    let history = RunHistory {
        records,
        iterations,
        oracle_calls,
        weighted_point_average: agg.point_sum.iter().map(|v| v / w).collect(),
        weighted_gradient_average: agg.shift.iter().map(|v| v / w).collect(),
        final_gap: gap,
    };
    UniversalRun { point: best.point, value: best.value, converged, history }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ExactOracle;

    #[test]
    fn box_prox_step_clamps() {
        let prox = ProxSetup::EuclideanBox { lower: vec![0.0, 0.0] };
        let out = prox_step(&prox, &[1.0, 1.0], &[2.0, 0.0], 1.0);
        assert_eq!(out, vec![0.0, 1.0]);
    }

    #[test]
    fn simplex_prox_ignores_constant_gradients() {
        let prox = ProxSetup::EntropicSimplex { dim: 3 };
        let y = vec![0.2, 0.3, 0.5];
        let out = prox_step(&prox, &y, &[4.0, 4.0, 4.0], 0.7);
        for i in 0..3 {
            assert!((out[i] - y[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn simplex_prox_multiplicative_update() {
        let prox = ProxSetup::EntropicSimplex { dim: 2 };
        let out = prox_step(&prox, &[0.5, 0.5], &[core::f64::consts::LN_2, 0.0], 1.0);
        assert!((out[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((out[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn free_prox_is_a_gradient_step() {
        let prox = ProxSetup::EuclideanFree { dim: 2 };
        assert_eq!(prox_step(&prox, &[1.0, 2.0], &[0.5, -1.0], 2.0), vec![0.0, 4.0]);
    }

    fn quadratic_oracle(target: Vec<f64>) -> impl FirstOrderOracle {
        let dim = target.len();
        ExactOracle::new(dim, move |y: &[f64]| {
            let d = math::sub(y, &target);
            (0.5 * math::dot(&d, &d), d)
        })
    }

    #[test]
    fn quadratic_reaches_minimizer_accelerated() {
        let target = vec![1.5, -2.0, 0.25];
        let mut oracle = quadratic_oracle(target.clone());
        let prox = ProxSetup::EuclideanFree { dim: 3 };
        let run = universal_method(
            &mut oracle,
            &prox,
            &[0.0, 0.0, 0.0],
            1e-8,
            MethodOrder::Accelerated,
            100_000,
        )
        .unwrap();
        assert!(run.converged, "did not converge");
        let err = math::norm2(&math::sub(&run.point, &target));
        assert!(err <= 2e-4, "error {err}");
    }

    #[test]
    fn quadratic_reaches_minimizer_plain() {
        // The plain certificate decays like V/ε, so keep the start close
        // and the target accuracy moderate.
        let target = vec![0.4, -0.2];
        let mut oracle = quadratic_oracle(target.clone());
        let prox = ProxSetup::EuclideanFree { dim: 2 };
        let run = universal_method(
            &mut oracle,
            &prox,
            &[0.0, 0.0],
            1e-5,
            MethodOrder::Plain,
            200_000,
        )
        .unwrap();
        assert!(run.converged, "did not converge");
        let err = math::norm2(&math::sub(&run.point, &target));
        assert!(err <= 1e-2, "error {err}");
    }

    #[test]
    fn absolute_value_nonsmooth_path() {
        // The p = 0 certificate needs ~2·V/ε² iterations: with the start at
        // 0.3 that is below 2·10⁵.
        let mut oracle = ExactOracle::new(1, |y: &[f64]| (y[0].abs(), vec![y[0].signum()]));
        let prox = ProxSetup::EuclideanFree { dim: 1 };
        let run = universal_method(
            &mut oracle,
            &prox,
            &[0.3],
            1e-3,
            MethodOrder::Plain,
            200_000,
        )
        .unwrap();
        assert!(run.converged, "final gap {}", run.history.final_gap);
        assert!(run.value <= 1e-3, "objective {}", run.value);
    }

    #[test]
    fn best_estimate_is_non_increasing_and_iterates_feasible() {
        let target = vec![0.4, 0.1, 0.5];
        let dim = 3;
        // KL divergence to a fixed simplex point; minimized there.
        let mut oracle = ExactOracle::new(dim, move |y: &[f64]| {
            let mut v = 0.0;
            let mut g = vec![0.0; 3];
            for i in 0..3 {
                v += y[i] * (y[i] / target[i]).ln();
                g[i] = (y[i] / target[i]).ln() + 1.0;
            }
            (v, g)
        });
        let prox = ProxSetup::EntropicSimplex { dim };
        let y0 = vec![1.0 / 3.0; 3];
        let run =
            universal_method(&mut oracle, &prox, &y0, 1e-7, MethodOrder::Accelerated, 5_000)
                .unwrap();
        assert!(run.converged);
        let mut last = f64::INFINITY;
        for rec in &run.history.records {
            assert!(rec.objective_estimate <= last + 1e-15);
            last = rec.objective_estimate;
        }
        let sum: f64 = run.point.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        assert!(run.point.iter().all(|&v| v > 0.0));
        assert!((run.point[0] - 0.4).abs() < 1e-3);
    }

    #[test]
    fn box_constraint_is_respected_exactly() {
        let mut oracle = quadratic_oracle(vec![-1.0, 2.0]);
        let prox = ProxSetup::EuclideanBox { lower: vec![0.0, 0.0] };
        let run = universal_method(
            &mut oracle,
            &prox,
            &[1.0, 1.0],
            1e-9,
            MethodOrder::Accelerated,
            20_000,
        )
        .unwrap();
        assert!(run.converged);
        assert!(run.point[0] >= 0.0);
        assert!((run.point[0] - 0.0).abs() <= 1e-4);
        assert!((run.point[1] - 2.0).abs() <= 1e-4);
    }

    /// Convex C¹ piecewise quadratic: curvature 100 inside |t| ≤ 0.1 and
    /// curvature 1 outside, minimum at 0.
    fn two_region_objective(t: f64) -> (f64, f64) {
        let a = 0.1;
        if t.abs() <= a {
            (50.0 * t * t, 100.0 * t)
        } else {
            let s = t.signum();
            let b = 99.0 * a * s;
            // matches value 50a² and slope 100a at the interface
            (0.5 * (t + b) * (t + b) - 49.5 * a * a, t + b)
        }
    }

    #[test]
    fn line_search_adapts_to_local_curvature() {
        let mut oracle = ExactOracle::new(1, |y: &[f64]| {
            let (v, g) = two_region_objective(y[0]);
            (v, vec![g])
        });
        let prox = ProxSetup::EuclideanFree { dim: 1 };
        // A fixed iteration budget: the point of this run is the curvature
        // trace across the two regions, not the certificate.
        let run =
            universal_method(&mut oracle, &prox, &[10.0], 1e-12, MethodOrder::Plain, 400)
                .unwrap();
        let max_m = run.history.records.iter().map(|r| r.curvature).fold(0.0f64, f64::max);
        let min_m =
            run.history.records.iter().map(|r| r.curvature).fold(f64::INFINITY, f64::min);
        assert!(
            max_m / min_m >= 10.0,
            "accepted curvature range {min_m}..{max_m} spans less than 10x"
        );
        assert!(max_m >= 50.0, "never saw the stiff region: max {max_m}");
        assert!(min_m <= 5.0, "never saw the flat region: min {min_m}");
    }

    #[test]
    fn divergence_reports_diagnostics() {
        // An "oracle" that always reports a huge value violates every model:
        // the line search must give up rather than loop.
        struct Hostile;
        impl FirstOrderOracle for Hostile {
            fn dimension(&self) -> usize {
                1
            }
            fn evaluate(&mut self, _point: &[f64], _delta: f64) -> crate::error::Result<OracleReply> {
                Ok(OracleReply {
                    value: f64::NAN,
                    gradient: vec![1.0],
                    delta: 0.0,
                    lipschitz: None,
                    provenance: crate::oracle::Provenance::User,
                })
            }
        }
        let prox = ProxSetup::EuclideanFree { dim: 1 };
        let err = universal_method(&mut Hostile, &prox, &[3.0], 1e-6, MethodOrder::Plain, 10)
            .unwrap_err();
        assert!(matches!(err, CoreError::Divergence { .. }));
    }
}
