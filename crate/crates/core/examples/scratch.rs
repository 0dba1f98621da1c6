use std::time::Instant;

use etk_core::barycenter::{objective, solve_dual, solve_primal, BarycenterProblem};
use etk_core::math::{norm_inf, sub, SeededSampler};
use etk_core::types::{CostMatrix, Matrix, ProbabilityVector};

fn rand_measure(n: usize, rng: &mut SeededSampler) -> ProbabilityVector {
    ProbabilityVector::new((0..n).map(|_| 0.2 + rng.next_f64()).collect()).unwrap()
}

/// Symmetric cost with w = normalized kernel row sums: argmin Δ(·,w) = w.
fn kernel_consistent(n: usize, seed: u64, gamma: f64, scale: f64) -> (CostMatrix, ProbabilityVector) {
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
        (0..n).map(|i| (0..n).map(|j| (-cost.at(i, j) / gamma).exp()).sum()).collect(),
    ).unwrap();
    (cost, w)
}

fn main() {
    // 4a: m=1 dual returns w exactly; primal from uniform start.
    let (cost, w) = kernel_consistent(5, 31, 1.0, 0.6);
    let problem = BarycenterProblem::new(vec![w.clone()], cost.clone(), 1.0).unwrap();
    let dual = solve_dual(&problem, 1e-9).unwrap();
    println!("4a dual err {:e}", norm_inf(&sub(dual.barycenter.as_slice(), w.as_slice())));
    let t0 = Instant::now();
    let primal = solve_primal(&problem, 1e-10).unwrap();
    println!("4a primal err {:e} conv={} iters={} ({:?})",
             norm_inf(&sub(primal.barycenter.as_slice(), w.as_slice())), primal.converged, primal.run.iterations, t0.elapsed());

    // 4b: m=3 identical measures, primal to 1e-5.
    let problem3 = BarycenterProblem::new(vec![w.clone(), w.clone(), w.clone()], cost.clone(), 1.0).unwrap();
    for eps in [1e-8, 1e-9] {
        let t0 = Instant::now();
        let primal = solve_primal(&problem3, eps).unwrap();
        println!("4b eps={eps:e}: err {:e} conv={} iters={} ({:?})",
                 norm_inf(&sub(primal.barycenter.as_slice(), w.as_slice())), primal.converged, primal.run.iterations, t0.elapsed());
        let dual = solve_dual(&problem3, eps).unwrap();
        println!("4b dual: err {:e} iters={}",
                 norm_inf(&sub(dual.barycenter.as_slice(), w.as_slice())), dual.run.iterations);
    }

    // 4c: c=0 returns uniform.
    let mut rng = SeededSampler::new(71);
    let measures: Vec<_> = (0..3).map(|_| rand_measure(6, &mut rng)).collect();
    let pz = BarycenterProblem::new(measures, CostMatrix::zero(6), 1.0).unwrap();
    let t0 = Instant::now();
    let primal = solve_primal(&pz, 1e-9).unwrap();
    let u = ProbabilityVector::uniform(6);
    println!("4c primal err {:e} iters={} ({:?})", norm_inf(&sub(primal.barycenter.as_slice(), u.as_slice())), primal.run.iterations, t0.elapsed());
    let dual = solve_dual(&pz, 1e-9).unwrap();
    println!("4c dual err {:e}", norm_inf(&sub(dual.barycenter.as_slice(), u.as_slice())));

    // 4d: primal/dual objective agreement on random instances n<=10, m<=5.
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        let mut rng = SeededSampler::new(100 + seed);
        let n = 4 + (seed as usize % 7);
        let m = 2 + (seed as usize % 4);
        let cost = CostMatrix::new(Matrix::from_fn(n, n, |_, _| rng.next_f64())).unwrap();
        let measures: Vec<_> = (0..m).map(|_| rand_measure(n, &mut rng)).collect();
        let pr = BarycenterProblem::new(measures, cost, 1.0).unwrap();
        let primal = solve_primal(&pr, 1e-5).unwrap();
        let dual = solve_dual(&pr, 1e-7).unwrap();
        let (dual_obj, _) = objective(&pr, &dual.barycenter, 1e-10).unwrap();
        let rel = (primal.objective - dual_obj).abs() / primal.objective.abs().max(dual_obj.abs());
        worst = worst.max(rel);
        println!("4d seed={seed} n={n} m={m}: primal={} dualside={} rel={:e} (p_iters={}, d_iters={}, spread={:e})",
                 primal.objective, dual_obj, rel, primal.run.iterations, dual.run.iterations, dual.recovery_spread);
    }
    println!("4d worst rel {worst:e} ({:?})", t0.elapsed());
}
