use rayon::prelude::*;

use super::estimate::McEstimate;
use super::gbm::{lognormal_step, normal_draw, GbmParams};
use crate::error::{param, Result};
use crate::rng::stream;
use crate::scalar::Real;

fn check_contract<T: Real>(gbm: &GbmParams<T>, strike: T, maturity: T, samples: usize) -> Result<()> {
    gbm.validate()?;
    if !(strike >= T::zero() && !strike.is_nan()) {
        return Err(param(format!("strike must be non-negative, got {strike}")));
    }
    if !(maturity > T::zero() && maturity.is_finite()) {
        return Err(param(format!("maturity must be positive, got {maturity}")));
    }
    if samples < 2 {
        return Err(param(format!("need at least 2 samples, got {samples}")));
    }
    Ok(())
}

/// Discounted European call under the risk-neutral convention (`drift` is the
/// rate `r`). Path `i` uses the first normal draw of stream `(seed, i)` for an
/// exact jump to maturity; `dt` and `steps` are not used.
pub fn price_european_call<T: Real>(gbm: &GbmParams<T>, strike: T, maturity: T, samples: usize) -> Result<McEstimate<T>> {
    check_contract(gbm, strike, maturity, samples)?;
    let discount = (-gbm.drift * maturity).exp();
    let payoffs: Vec<T> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(gbm.seed, i);
            let s = lognormal_step(gbm.initial_price, gbm.drift, gbm.volatility, maturity, normal_draw(&mut rng));
            discount * (s - strike).max(T::zero())
        })
        .collect();
    McEstimate::from_samples(&payoffs, "monte-carlo european call")
}

/// Discounted arithmetic-average Asian call monitored at `dates` in `(0, T]`.
/// Each path steps exactly between consecutive dates, one draw per date.
pub fn price_asian_call<T: Real>(
    gbm: &GbmParams<T>,
    strike: T,
    maturity: T,
    dates: &[T],
    samples: usize,
) -> Result<McEstimate<T>> {
    check_contract(gbm, strike, maturity, samples)?;
    if dates.is_empty() {
        return Err(param("at least one monitoring date is required"));
    }
    let mut prev = T::zero();
    for &d in dates {
        if !(d > prev && d <= maturity) {
            return Err(param(format!(
                "monitoring dates must increase strictly within (0, {maturity}], got {d}"
            )));
        }
        prev = d;
    }
    let discount = (-gbm.drift * maturity).exp();
    let count = T::from_count(dates.len());
    let payoffs: Vec<T> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(gbm.seed, i);
            let mut s = gbm.initial_price;
            let mut t = T::zero();
            let mut total = T::zero();
            for &d in dates {
                s = lognormal_step(s, gbm.drift, gbm.volatility, d - t, normal_draw(&mut rng));
                total += s;
                t = d;
            }
            discount * (total / count - strike).max(T::zero())
        })
        .collect();
    McEstimate::from_samples(&payoffs, "monte-carlo asian call")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gbm(vol: f64, seed: u64) -> GbmParams<f64> {
        GbmParams {
            initial_price: 100.0,
            drift: 0.0,
            volatility: vol,
            dt: 1.0,
            steps: 1,
            seed,
        }
    }

    #[test]
    fn deterministic_payoffs() {
        let e = price_european_call(&gbm(0.0, 1), 50.0, 1.0, 100).unwrap();
        assert_eq!(e.mean, 50.0);
        assert_eq!(e.std_error, 0.0);
        let a = price_asian_call(&gbm(0.0, 1), 50.0, 1.0, &[0.25, 0.5, 1.0], 100).unwrap();
        assert_eq!(a.mean, 50.0);
        let far = price_european_call(&gbm(0.2, 1), 1e9, 1.0, 1000).unwrap();
        assert_eq!(far.mean, 0.0);
    }

    #[test]
    fn single_date_asian_is_european() {
        let g = gbm(0.3, 5);
        let e = price_european_call(&g, 95.0, 2.0, 500).unwrap();
        let a = price_asian_call(&g, 95.0, 2.0, &[2.0], 500).unwrap();
        assert_eq!(e.mean, a.mean);
    }

    #[test]
    fn rejects_bad_contracts() {
        let g = gbm(0.2, 0);
        assert!(price_european_call(&g, 100.0, 1.0, 1).is_err());
        assert!(price_european_call(&g, 100.0, 0.0, 10).is_err());
        assert!(price_asian_call(&g, 100.0, 1.0, &[], 10).is_err());
        assert!(price_asian_call(&g, 100.0, 1.0, &[0.5, 0.5], 10).is_err());
        assert!(price_asian_call(&g, 100.0, 1.0, &[1.5], 10).is_err());
    }
}
