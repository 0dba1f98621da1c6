//! Birkhoff–Hilbert projective metric on positive vectors.

#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};

/// Projective distance `ρ(u, v) = ln( max_i(u_i/v_i) · max_i(v_i/u_i) )`.
///
/// Zero exactly on rays (`u = c·v`, `c > 0`); the balancing map is a
/// contraction in this metric, which is why it converges geometrically.
/// Exposed as a diagnostic; the solvers stop on residuals instead.
pub fn hilbert_metric(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(CoreError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
            what: "vector length",
        });
    }
    if u.is_empty() {
        return Err(CoreError::invalid("vectors must be non-empty"));
    }
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    for (i, (&a, &b)) in u.iter().zip(v).enumerate() {
        if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(CoreError::invalid(alloc::format!(
                "entry {i} must be strictly positive and finite"
            )));
        }
        let r = a / b;
        max_ratio = max_ratio.max(r);
        min_ratio = min_ratio.min(r);
    }
    // max_i(v_i/u_i) = 1 / min_i(u_i/v_i); the log form avoids overflow.
    Ok(max_ratio.ln() - min_ratio.ln())
}
