use serde::Serialize;

use crate::error::{param, Result};
use crate::scalar::Real;

/// Chebyshev prefactor: `k = 10·σ²/ε²` samples bound the failure probability by 1/10.
pub const CHEBYSHEV_FACTOR: f64 = 10.0;

/// `⌈10·σ²/ε²⌉`, at least 1.
pub fn chebyshev_samples<T: Real>(variance: T, epsilon: T) -> Result<u64> {
    let (var, eps) = (variance.as_f64(), epsilon.as_f64());
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(param(format!("epsilon must be positive, got {eps}")));
    }
    if !(var >= 0.0 && var.is_finite()) {
        return Err(param(format!("variance must be non-negative, got {var}")));
    }
    let x = CHEBYSHEV_FACTOR * var / (eps * eps);
    // 10·1/0.1² evaluates to 1000.0000000000001; do not let rounding add a sample.
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    Ok((k as u64).max(1))
}

/// Order-independent-of-threads summation (fixed pairwise tree).
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    if values.len() <= 64 {
        return values.iter().fold(T::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate<T> {
    pub mean: T,
    pub std_dev: T,
    pub samples: usize,
    pub std_error: T,
    /// Half-width the error stays within, with the confidence in `confidence`.
    pub epsilon: T,
    pub confidence: String,
    pub method: String,
}

impl<T: Real> McEstimate<T> {
    /// Sample mean, unbiased standard deviation and the Chebyshev half-width
    /// `√(10·σ̂²/k)`.
    pub fn from_samples(values: &[T], method: &str) -> Result<Self> {
        let k = values.len();
        if k == 0 {
            return Err(param("at least one sample is required"));
        }
        let n = T::from_count(k);
        let mean = pairwise_sum(values) / n;
        let dev: Vec<T> = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
        let var = if k > 1 {
            pairwise_sum(&dev) / T::from_count(k - 1)
        } else {
            T::zero()
        };
        let std_dev = var.sqrt();
        Ok(Self {
            mean,
            std_dev,
            samples: k,
            std_error: std_dev / n.sqrt(),
            epsilon: (T::from_f64_lossy(CHEBYSHEV_FACTOR) * var / n).sqrt(),
            confidence: "P(|error| >= epsilon) <= 0.1 (Chebyshev)".into(),
            method: method.into(),
        })
    }
}
