//! Shared instance builders for the integration suites.
#![allow(dead_code)] // each suite uses its own subset

use etk_core::math::SeededSampler;
use etk_core::ot::{semidual_value, solve_entropic_ot, SolverOptions, StoppingRule};
use etk_core::types::{CostMatrix, Matrix, ProbabilityVector};

pub fn random_cost(n: usize, scale: f64, rng: &mut SeededSampler) -> CostMatrix {
    CostMatrix::new(Matrix::from_fn(n, n, |_, _| scale * rng.next_f64())).unwrap()
}

pub fn random_measure(n: usize, rng: &mut SeededSampler) -> ProbabilityVector {
    ProbabilityVector::new((0..n).map(|_| 0.2 + rng.next_f64()).collect()).unwrap()
}

/// Symmetric cost paired with the marginal given by its normalized kernel
/// row sums. For such `(c, w)` the self-transport potentials are constant,
/// so `Δ(·, w)` has a vanishing tangential gradient at `w`: the smoothed
/// barycenter of copies of `w` is exactly `w`.
pub fn kernel_consistent_instance(
    n: usize,
    seed: u64,
    gamma: f64,
    scale: f64,
) -> (CostMatrix, ProbabilityVector) {
    let mut rng = SeededSampler::new(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = if i == j { 0.0 } else { scale * rng.next_f64() };
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    let cost = CostMatrix::new(m).unwrap();
    let w = ProbabilityVector::new(
        (0..n)
            .map(|i| (0..n).map(|j| (-cost.at(i, j) / gamma).exp()).sum())
            .collect(),
    )
    .unwrap();
    (cost, w)
}

/// High-accuracy value of the smoothed distance via the semi-dual at the
/// converged potentials: second-order accurate in the marginal residual.
pub fn smoothed_distance(
    cost: &CostMatrix,
    l: &ProbabilityVector,
    w: &ProbabilityVector,
    gamma: f64,
    tol: f64,
) -> f64 {
    let report = solve_entropic_ot(
        cost,
        l,
        w,
        gamma,
        &SolverOptions::with_stop(StoppingRule::MarginalResidual(tol)),
    )
    .unwrap();
    assert!(report.converged, "inner solve at tol {tol:e} did not converge");
    let lambda = &report.duals.lambda;
    let inner: f64 = lambda.iter().zip(l.iter()).map(|(a, b)| a * b).sum();
    inner - semidual_value(lambda, w, cost, gamma).unwrap()
}
