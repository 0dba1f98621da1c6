//! Domain types: simplex vectors, dense matrices, cost matrices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};

/// Entries below this are rejected when building a [`ProbabilityVector`];
/// the balancing updates take logarithms of the marginals.
pub const MIN_MASS: f64 = 1e-300;

/// A point on the probability simplex: strictly positive weights summing to 1.
///
/// Construction normalizes the input, so callers may pass unnormalized
/// histograms. Zero or negative entries are rejected rather than clamped;
/// use [`ProbabilityVector::clamped`] to smooth near-zero data explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(CoreError::invalid("probability vector must be non-empty"));
        }
        let mut sum = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(CoreError::invalid(format!("weight {i} is not finite")));
            }
            if w < MIN_MASS {
                return Err(CoreError::invalid(format!(
                    "weight {i} = {w:e} is below the minimum mass {MIN_MASS:e}"
                )));
            }
            sum += w;
        }
        if !sum.is_finite() {
            return Err(CoreError::invalid("total mass is not finite"));
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0 / n as f64; n] }
    }

    /// Clamp entries up to `floor` and renormalize. The explicit smoothing
    /// utility for inputs that carry (near-)zero mass.
    pub fn clamped(raw: &[f64], floor: f64) -> Result<Self> {
        if floor < MIN_MASS {
            return Err(CoreError::invalid("clamp floor must be at least the minimum mass"));
        }
        Self::new(raw.iter().map(|&w| w.max(floor)).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.weights.iter()
    }

    /// Shannon entropy `−Σ w ln w` (natural log).
    pub fn entropy(&self) -> f64 {
        -self.weights.iter().map(|&w| w * w.ln()).sum::<f64>()
    }
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(CoreError::invalid("matrix must have at least one row"));
        }
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(CoreError::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                    what: if i == 1 { "matrix row 1" } else { "matrix row" },
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += self.at(i, j);
            }
        }
        sums
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
    }

    /// Apply one permutation to both axes: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Matrix {
        debug_assert_eq!(perm.len(), self.rows);
        Matrix::from_fn(self.rows, self.cols, |i, j| self.at(perm[i], perm[j]))
    }
}

/// Nonnegative finite cost matrix `c_ij`, optionally derived from support
/// points as squared pairwise Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Matrix,
}

impl CostMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        if entries.rows() != entries.cols() {
            return Err(CoreError::DimensionMismatch {
                expected: entries.rows(),
                found: entries.cols(),
                what: "cost matrix columns",
            });
        }
        for i in 0..entries.rows() {
            for j in 0..entries.cols() {
                let c = entries.at(i, j);
                if !c.is_finite() {
                    return Err(CoreError::invalid(format!("cost ({i}, {j}) is not finite")));
                }
                if c < 0.0 {
                    return Err(CoreError::invalid(format!("cost ({i}, {j}) = {c} is negative")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn zero(n: usize) -> Self {
        Self { entries: Matrix::zeros(n, n) }
    }

    /// Squared pairwise Euclidean distances between support points.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(CoreError::invalid("need at least one support point"));
        }
        let d = points[0].len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(CoreError::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                    what: "support point dimension",
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(CoreError::invalid(format!("support point {i} has non-finite coordinate")));
            }
        }
        let entries = Matrix::from_fn(n, n, |i, j| {
            points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        });
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.entries.at(i, j)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.max_entry()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_vector_normalizes() {
        let p = ProbabilityVector::new(vec![2.0, 2.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn probability_vector_rejects_zero_and_negative() {
        assert!(ProbabilityVector::new(vec![1.0, 0.0]).is_err());
        assert!(ProbabilityVector::new(vec![1.0, -0.1]).is_err());
        assert!(ProbabilityVector::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn clamped_lifts_small_entries() {
        let p = ProbabilityVector::clamped(&[1.0, 0.0, 1e-320], 1e-6).unwrap();
        assert!(p.get(1) > 0.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn cost_from_points_is_squared_distance() {
        let c = CostMatrix::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(c.at(0, 0), 0.0);
        assert_eq!(c.at(0, 1), 1.0);
        assert_eq!(c.at(1, 0), 1.0);
    }

    #[test]
    fn cost_rejects_negative_entries() {
        let m = Matrix::from_rows(vec![vec![0.0, -0.1], vec![0.1, 0.0]]).unwrap();
        assert!(CostMatrix::new(m).is_err());
    }

    #[test]
    fn entropy_of_uniform() {
        let p = ProbabilityVector::uniform(4);
        assert!((p.entropy() - (4.0f64).ln()).abs() < 1e-12);
    }
}
