use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::normal::inverse_normal_cdf;
use crate::error::{param, Result};
use crate::rng::{open_uniform, stream};
use crate::scalar::Real;

/// Geometric Brownian motion `dS = α·S·dt + σ·S·dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbmParams<T> {
    pub initial_price: T,
    pub drift: T,
    pub volatility: T,
    pub dt: T,
    pub steps: usize,
    pub seed: u64,
}

impl<T: Real> GbmParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_price > T::zero() && self.initial_price.is_finite()) {
            return Err(param(format!("initial price must be positive, got {}", self.initial_price)));
        }
        if !self.drift.is_finite() {
            return Err(param("drift must be finite"));
        }
        if !(self.volatility >= T::zero() && self.volatility.is_finite()) {
            return Err(param(format!("volatility must be non-negative, got {}", self.volatility)));
        }
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(param(format!("time step must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Standard normal draw from a uniform stream.
pub fn normal_draw<T: Real>(rng: &mut impl Rng) -> T {
    T::from_f64_lossy(inverse_normal_cdf(open_uniform(rng)))
}

/// Exact lognormal update over a step of length `dt`.
pub fn lognormal_step<T: Real>(price: T, drift: T, volatility: T, dt: T, phi: T) -> T {
    let half = T::from_f64_lossy(0.5);
    price * ((drift - half * volatility * volatility) * dt + volatility * dt.sqrt() * phi).exp()
}

/// `S_{t+1} = S_t·exp((α − σ²/2)δt + σ√δt·φ)`
pub fn gbm_step<T: Real>(price: T, params: &GbmParams<T>, phi: T) -> T {
    lognormal_step(price, params.drift, params.volatility, params.dt, phi)
}

/// Euler scheme `S + αSδt + σS√δt·φ`, kept for comparison only (biased, may go negative).
pub fn gbm_step_euler<T: Real>(price: T, params: &GbmParams<T>, phi: T) -> T {
    price + params.drift * price * params.dt + params.volatility * price * params.dt.sqrt() * phi
}

/// Prices `S_0 … S_steps` of path `index`, drawn from stream `(seed, index)`.
pub fn simulate_path<T: Real>(params: &GbmParams<T>, index: u64) -> Vec<T> {
    let mut rng = stream(params.seed, index);
    let mut path = Vec::with_capacity(params.steps + 1);
    let mut s = params.initial_price;
    path.push(s);
    for _ in 0..params.steps {
        s = gbm_step(s, params, normal_draw(&mut rng));
        path.push(s);
    }
    path
}

/// `S_steps` for paths `0..paths`, in path order.
pub fn terminal_prices<T: Real>(params: &GbmParams<T>, paths: usize) -> Result<Vec<T>> {
    params.validate()?;
    Ok((0..paths as u64)
        .into_par_iter()
        .map(|i| *simulate_path(params, i).last().expect("path includes S0"))
        .collect())
}
