//! Resampling kernels, patch distances, ε-match sets and normalized weights.
//!
//! All weight arithmetic runs in the log domain and is normalized by shifting
//! with the maximum, so tiny bandwidths never underflow to an all-zero vector.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Shape;

/// How candidate sites are weighted when drawing a pixel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightingMode {
    /// Gaussian kernel of bandwidth `b` on the plain difference vector.
    KernelGaussian { b: f64 },
    /// Uniform over all sites whose spatially weighted SSD is within
    /// `(1 + epsilon)` of the best one.
    UniformEpsilon { epsilon: f64, spatial_sigma: f64 },
}

impl WeightingMode {
    pub fn kernel(b: f64) -> Result<Self> {
        let mode = WeightingMode::KernelGaussian { b };
        mode.validate()?;
        Ok(mode)
    }

    /// ε-rule with the default spatial falloff for window parameter `w`.
    pub fn uniform(epsilon: f64, w: usize) -> Result<Self> {
        let mode = WeightingMode::UniformEpsilon {
            epsilon,
            spatial_sigma: default_spatial_sigma(w),
        };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightingMode::KernelGaussian { b } if !(b > 0.0 && b.is_finite()) => Err(Error::InvalidParameter(
                format!("bandwidth b must be positive, got {b}"),
            )),
            WeightingMode::UniformEpsilon { epsilon, .. } if !(epsilon >= 0.0 && epsilon.is_finite()) => Err(
                Error::InvalidParameter(format!("epsilon must be nonnegative, got {epsilon}")),
            ),
            WeightingMode::UniformEpsilon { spatial_sigma, .. }
                if !(spatial_sigma > 0.0 && spatial_sigma.is_finite()) =>
            {
                Err(Error::InvalidParameter(format!(
                    "spatial sigma must be positive, got {spatial_sigma}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// `(2w - 1) / 6.4`: puts roughly three standard deviations at the window edge.
pub fn default_spatial_sigma(w: usize) -> f64 {
    (2 * w - 1) as f64 / 6.4
}

fn squared_norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum()
}

/// Standard Gaussian density on ℝᵖ, `p = y.len()`.
pub fn gaussian_kernel(y: &[f64]) -> f64 {
    let p = y.len() as f64;
    (2.0 * PI).powf(-p / 2.0) * (-squared_norm(y) / 2.0).exp()
}

/// `b^{-p} · gaussian_kernel(y / b)`.
pub fn scaled_kernel(y: &[f64], b: f64) -> f64 {
    let scaled: Vec<f64> = y.iter().map(|v| v / b).collect();
    b.powi(-(y.len() as i32)) * gaussian_kernel(&scaled)
}

/// Natural log of [`scaled_kernel`], from the squared difference norm.
pub fn log_weight_sq(squared: f64, p: usize, b: f64) -> f64 {
    let p = p as f64;
    -p * b.ln() - 0.5 * p * (2.0 * PI).ln() - squared / (2.0 * b * b)
}

/// Natural log of [`scaled_kernel`].
pub fn log_weight(diff: &[f64], b: f64) -> f64 {
    log_weight_sq(squared_norm(diff), diff.len(), b)
}

/// Log-weights together with the probabilities they normalize to.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    pub log_weights: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl WeightVector {
    /// Shannon entropy of the probabilities, in nats.
    pub fn entropy(&self) -> f64 {
        self.probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }

    /// Index whose cumulative probability first exceeds `u ∈ [0, 1)`.
    pub fn sample_index(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = i;
                if u < acc {
                    return i;
                }
            }
        }
        last
    }
}

/// Softmax of `log_weights` after shifting by their maximum.
pub fn normalize_weights(log_weights: Vec<f64>) -> Result<WeightVector> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if log_weights.is_empty() || !max.is_finite() {
        return Err(Error::EmptyCandidates);
    }
    let mut probabilities: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= z);
    Ok(WeightVector {
        log_weights,
        probabilities,
    })
}

/// Spatial falloff `exp(-‖o‖² / 2σ²)` for each offset of `shape`.
pub fn spatial_weights(shape: &Shape, spatial_sigma: f64) -> Vec<f64> {
    let denom = 2.0 * spatial_sigma * spatial_sigma;
    shape
        .offsets()
        .iter()
        .map(|&(dr, dc)| (-((dr * dr + dc * dc) as f64) / denom).exp())
        .collect()
}

/// Sum of squared differences weighted by precomputed spatial weights.
#[inline]
pub fn weighted_ssd(a: &[f64], b: &[f64], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), g)| g * (x - y) * (x - y))
        .sum()
}

/// Gaussian-weighted SSD between two patches read with `shape`.
pub fn patch_distance(a: &[f64], b: &[f64], spatial_sigma: f64, shape: &Shape) -> Result<f64> {
    for v in [a, b] {
        if v.len() != shape.len() {
            return Err(Error::ShapeMismatch {
                expected: shape.len(),
                found: v.len(),
            });
        }
    }
    Ok(weighted_ssd(a, b, &spatial_weights(shape, spatial_sigma)))
}

/// Indices with `distance ≤ (1 + ε) · min(distances)`.
pub fn epsilon_match_set(distances: &[f64], epsilon: f64) -> Result<Vec<usize>> {
    let best = distances.iter().copied().fold(f64::INFINITY, f64::min);
    if distances.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let threshold = (1.0 + epsilon) * best;
    Ok(distances
        .iter()
        .enumerate()
        .filter(|(_, &d)| d <= threshold)
        .map(|(i, _)| i)
        .collect())
}
