use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::scalar::Real;

/// Inputs are losses (positive = bad). `confidence = 0.95` means 95% of the
/// sampled losses are no worse than `var`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport<T> {
    pub confidence: T,
    pub var: T,
    pub cvar: T,
    pub samples: usize,
}

/// Empirical VaR (smallest sample with empirical CDF ≥ α) and CVaR (mean of
/// losses strictly above VaR, or VaR if none are).
pub fn var_cvar<T: Real>(losses: &[T], confidence: T) -> Result<RiskReport<T>> {
    if losses.is_empty() {
        return Err(Error::Data("no loss samples".into()));
    }
    if !(confidence > T::zero() && confidence < T::one()) {
        return Err(param(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    if let Some(i) = losses.iter().position(|v| v.is_nan()) {
        return Err(Error::Data(format!("loss sample {} is NaN", i + 1)));
    }
    let mut sorted = losses.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let n = sorted.len();
    let x = confidence.as_f64() * n as f64;
    let nearest = x.round();
    // 0.95·100 must pick the 95th order statistic, not the 96th.
    let rank = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    let index = (rank as usize).clamp(1, n) - 1;
    let var = sorted[index];
    let tail = &sorted[sorted.partition_point(|&v| v <= var)..];
    let cvar = if tail.is_empty() {
        var
    } else {
        super::estimate::pairwise_sum(tail) / T::from_count(tail.len())
    };
    Ok(RiskReport {
        confidence,
        var,
        cvar,
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = var_cvar(&[0.0; 10], 0.9).unwrap();
        assert_eq!((r.var, r.cvar), (0.0, 0.0));
        let losses: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        let r = var_cvar(&losses, 0.95).unwrap();
        assert_eq!(r.var, 95.0);
        assert_eq!(r.cvar, 98.0);
        assert_eq!(r.samples, 100);
    }

    #[test]
    fn errors() {
        assert!(var_cvar::<f64>(&[], 0.9).is_err());
        assert!(var_cvar(&[1.0], 1.0).is_err());
        assert!(var_cvar(&[1.0], 0.0).is_err());
        assert!(var_cvar(&[1.0, f64::NAN], 0.5).is_err());
    }

    #[test]
    fn single_sample() {
        let r = var_cvar(&[3.5], 0.99).unwrap();
        assert_eq!((r.var, r.cvar), (3.5, 3.5));
    }
}
