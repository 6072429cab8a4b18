//! Kernel estimators of the conditional CDF of a pixel given its
//! neighborhood, and of the neighborhood density.
//!
//! Both sum over the candidate sites of the observed field: every anchor where
//! the shape fits, with `Xₜ` the anchor's value and `Yₜ` the neighborhood read
//! with the shape. Sums run in the log domain after shifting by the largest
//! log-weight.

use crate::error::{Error, Result};
use crate::field::{enumerate_candidates, extract_vector, Field, Shape};
use crate::weighting::log_weight;

fn candidate_log_weights(observed: &Field, shape: &Shape, y: &[f64], b: f64) -> Result<Vec<(f64, f64)>> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {b}")));
    }
    if y.len() != shape.len() {
        return Err(Error::ShapeMismatch {
            expected: shape.len(),
            found: y.len(),
        });
    }
    let anchors = enumerate_candidates(observed, shape);
    if anchors.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    anchors
        .into_iter()
        .map(|t| {
            let yt = extract_vector(observed, shape, t)?;
            let diff: Vec<f64> = y.iter().zip(yt.iter()).map(|(a, b)| a - b).collect();
            Ok((observed.get(t)?, log_weight(&diff, b)))
        })
        .collect()
}

/// `Σₜ 1{Xₜ ≤ x} W_b(y − Yₜ) / Σₛ W_b(y − Yₛ)`.
pub fn kernel_conditional_cdf(observed: &Field, shape: &Shape, y: &[f64], x: f64, b: f64) -> Result<f64> {
    let sites = candidate_log_weights(observed, shape, y, b)?;
    let max = sites.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for &(value, lw) in &sites {
        let wgt = (lw - max).exp();
        den += wgt;
        if value <= x {
            num += wgt;
        }
    }
    Ok(num / den)
}

/// Mean of `W_b(y − Yₜ)` over the candidate sites.
pub fn kernel_marginal_density(observed: &Field, shape: &Shape, y: &[f64], b: f64) -> Result<f64> {
    let sites = candidate_log_weights(observed, shape, y, b)?;
    let max = sites.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = sites.iter().map(|s| (s.1 - max).exp()).sum();
    Ok((max + sum.ln() - (sites.len() as f64).ln()).exp())
}
