//! Dual potentials, transport plans, and the maps between them.

use alloc::vec;
use alloc::vec::Vec;
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::math::{self, log_sum_exp_by};
use crate::types::{CostMatrix, Matrix, ProbabilityVector};

/// Pair of dual potentials for the two marginal constraints.
///
/// Potentials are determined only up to additive shifts; [`DualPotentials::canonicalized`]
/// picks the plan-preserving representative with zero-mean `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPotentials {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl DualPotentials {
    pub fn new(lambda: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if lambda.iter().chain(mu.iter()).any(|v| !v.is_finite()) {
            return Err(CoreError::invalid("dual potentials must be finite"));
        }
        Ok(Self { lambda, mu })
    }

    pub fn zeros(n: usize) -> Self {
        Self { lambda: vec![0.0; n], mu: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Shift `(λ, μ) → (λ − s·e, μ + s·e)` with `s = mean(λ)`.
    ///
    /// The shift leaves every sum `λ_i + μ_j` (hence the plan) unchanged and
    /// makes `⟨λ, e⟩ = 0`.
    pub fn canonicalized(&self) -> Self {
        let s = math::mean(&self.lambda);
        Self {
            lambda: self.lambda.iter().map(|v| v - s).collect(),
            mu: self.mu.iter().map(|v| v + s).collect(),
        }
    }

    /// 2-norm of the concatenated `(λ, μ)` in canonical form.
    pub fn canonical_norm(&self) -> f64 {
        let c = self.canonicalized();
        (math::dot(&c.lambda, &c.lambda) + math::dot(&c.mu, &c.mu)).sqrt()
    }
}

/// A strictly positive coupling with unit total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    entries: Matrix,
    gamma: f64,
}

impl TransportPlan {
    /// Wrap a nonnegative matrix with (approximately) unit mass. Plans built
    /// by the solvers are strictly positive; hand-built plans may touch zero.
    pub fn from_matrix(entries: Matrix, gamma: f64) -> Result<Self> {
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(CoreError::invalid("gamma must be positive and finite"));
        }
        if entries.as_slice().iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(CoreError::invalid("plan entries must be finite and nonnegative"));
        }
        let total = entries.total();
        if (total - 1.0).abs() > 1e-10 {
            return Err(CoreError::invalid(alloc::format!(
                "plan mass {total} is not 1 within 1e-10"
            )));
        }
        Ok(Self { entries, gamma })
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn row_marginals(&self) -> Vec<f64> {
        self.entries.row_sums()
    }

    pub fn col_marginals(&self) -> Vec<f64> {
        self.entries.col_sums()
    }

    /// Primal energy `γ Σ x ln x + Σ c x` of this plan.
    pub fn energy(&self, cost: &CostMatrix) -> f64 {
        let n = self.n();
        let mut entropy_term = 0.0;
        let mut cost_term = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = self.entries.at(i, j);
                if x > 0.0 {
                    entropy_term += x * x.ln();
                }
                cost_term += cost.at(i, j) * x;
            }
        }
        self.gamma * entropy_term + cost_term
    }
}

/// Normalized plan `x_ij = exp((−c_ij + λ_i + μ_j)/γ) / Z`, with `Z` chosen
/// so the entries sum to 1.
///
/// Computed in log domain: the exponent matrix is shifted by its maximum and
/// by the log-partition, so constant shifts of either potential cancel and
/// the entries never overflow. A non-finite exponent reports the offending
/// entry.
pub fn plan_from_duals(
    duals: &DualPotentials,
    cost: &CostMatrix,
    gamma: f64,
) -> Result<TransportPlan> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(CoreError::invalid("gamma must be positive and finite"));
    }
    let n = cost.n();
    if duals.lambda.len() != n {
        return Err(CoreError::DimensionMismatch {
            expected: n,
            found: duals.lambda.len(),
            what: "lambda length",
        });
    }
    if duals.mu.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, found: duals.mu.len(), what: "mu length" });
    }
    let mut exponents = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s = (-cost.at(i, j) + duals.lambda[i] + duals.mu[j]) / gamma;
            if !s.is_finite() {
                return Err(CoreError::Overflow { row: i, col: j });
            }
            exponents.set(i, j, s);
        }
    }
    let log_z = log_sum_exp_by(n * n, |k| exponents.as_slice()[k]);
    let entries = Matrix::from_fn(n, n, |i, j| (exponents.at(i, j) - log_z).exp());
    Ok(TransportPlan { entries, gamma })
}

/// Row and column defects of a plan against prescribed marginals.
#[derive(Debug, Clone)]
pub struct MarginalResidual {
    /// `Σ_j x_ij − l_i` per row.
    pub row_defect: Vec<f64>,
    /// `Σ_i x_ij − w_j` per column.
    pub col_defect: Vec<f64>,
    /// 2-norm of the concatenated defect vectors.
    pub norm: f64,
}

/// Defects `Ax − b` of the transport constraints, as a pair of vectors plus
/// their combined 2-norm.
pub fn marginal_residual(
    plan: &Matrix,
    l: &ProbabilityVector,
    w: &ProbabilityVector,
) -> MarginalResidual {
    debug_assert_eq!(plan.rows(), l.len());
    debug_assert_eq!(plan.cols(), w.len());
    let row_defect: Vec<f64> =
        plan.row_sums().iter().zip(l.iter()).map(|(s, m)| s - m).collect();
    let col_defect: Vec<f64> =
        plan.col_sums().iter().zip(w.iter()).map(|(s, m)| s - m).collect();
    let norm = (math::dot(&row_defect, &row_defect) + math::dot(&col_defect, &col_defect)).sqrt();
    MarginalResidual { row_defect, col_defect, norm }
}
