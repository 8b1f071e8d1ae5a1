//! Standard normal quantile. Delegates to statrs, whose `erfc⁻¹` uses the
//! Boost rational approximations (pure Rust, so draws reproduce across
//! platforms for a given seed).

use statrs::distribution::{ContinuousCDF, Normal};

/// `Φ⁻¹(p)` for `p ∈ (0, 1)`; ∓∞ at the endpoints and NaN outside.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    Normal::standard().inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_quantiles() {
        assert_eq!(inverse_normal_cdf(0.5), 0.0);
        assert!((inverse_normal_cdf(0.95) - 1.6448536269514722).abs() < 1e-14);
        assert!((inverse_normal_cdf(1e-10) + 6.361340902404056).abs() < 1e-12);
        assert!((inverse_normal_cdf(0.01) + 2.3263478740408408).abs() < 1e-14);
    }

    #[test]
    fn endpoints_and_symmetry() {
        assert_eq!(inverse_normal_cdf(0.0), f64::NEG_INFINITY);
        assert_eq!(inverse_normal_cdf(1.0), f64::INFINITY);
        assert!(inverse_normal_cdf(1.5).is_nan());
        for &p in &[0.001, 0.2, 0.4] {
            assert!((inverse_normal_cdf(p) + inverse_normal_cdf(1.0 - p)).abs() < 1e-12);
        }
    }
}
