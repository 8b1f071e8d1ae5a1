//! Statevector adiabatic evolution under `H(s) = (1 − s)·H₀ + s·H_P`.
//!
//! `H₀ = −Γ Σᵢ σˣᵢ` has the uniform superposition as its ground state and
//! `H_P` is the diagonal Ising image of the model. The Schrödinger equation
//! `dψ/dt = −i H(t/T) ψ` is integrated with classical fixed-step RK4 and no
//! renormalisation, so the norm drift measures integration error.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SolveResult;
use crate::error::{ensure_capacity, param, Error, Result};
use crate::qubo::{BinaryQuadraticModel, Bitstring, IsingModel};
use crate::scalar::Real;

pub const ADIABATIC_MAX_VARS: usize = 12;

/// Drift beyond this aborts the integration.
const NORM_FAILURE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticConfig {
    pub total_time: f64,
    pub steps: usize,
    pub transverse_strength: f64,
    /// Measurements drawn from the final state to populate `samples`.
    pub shots: usize,
    pub seed: u64,
}

impl AdiabaticConfig {
    pub fn new(total_time: f64, steps: usize) -> Self {
        Self {
            total_time,
            steps,
            transverse_strength: 1.0,
            shots: 1000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(param(format!("total time must be positive, got {}", self.total_time)));
        }
        if self.steps == 0 {
            return Err(param("steps must be at least 1"));
        }
        if !(self.transverse_strength > 0.0 && self.transverse_strength.is_finite()) {
            return Err(param(format!(
                "transverse strength must be positive, got {}",
                self.transverse_strength
            )));
        }
        if self.shots == 0 {
            return Err(param("shots must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdiabaticRun<T> {
    /// |ψ_k|² of the final state, basis index bit i = variable i.
    pub probabilities: Vec<T>,
    pub ground_states: Vec<usize>,
    pub ground_state_probability: T,
    /// max over steps of |‖ψ‖² − 1|
    pub max_norm_drift: T,
}

/// `out = −i·H(s)·ψ`
fn schrodinger_rhs<T: Real>(
    diag: &[T],
    gamma: T,
    s: T,
    psi: &[Complex<T>],
    n: usize,
    out: &mut [Complex<T>],
) {
    let driver = (T::one() - s) * gamma;
    let minus_i = Complex::new(T::zero(), -T::one());
    for (k, o) in out.iter_mut().enumerate() {
        let mut flipped = Complex::new(T::zero(), T::zero());
        for q in 0..n {
            flipped += psi[k ^ (1 << q)];
        }
        let h_psi = psi[k] * (s * diag[k]) - flipped * driver;
        *o = minus_i * h_psi;
    }
}

fn norm_sq<T: Real>(psi: &[Complex<T>]) -> T {
    psi.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
}

/// Integrates the anneal and reports the final distribution.
pub fn adiabatic_evolve<T: Real>(model: &BinaryQuadraticModel<T>, config: &AdiabaticConfig) -> Result<AdiabaticRun<T>> {
    config.validate()?;
    let n = model.num_vars();
    ensure_capacity("variables", n, ADIABATIC_MAX_VARS)?;
    let dim = 1usize << n;

    let ising = model.to_ising();
    let diag: Vec<T> = (0..dim)
        .map(|k| {
            let x = Bitstring::from_index(k as u64, n);
            ising
                .energy(&IsingModel::<T>::spins_of(&x))
                .expect("spin count matches")
        })
        .collect();

    let amp = T::one() / T::from_count(dim).sqrt();
    let mut psi = vec![Complex::new(amp, T::zero()); dim];
    let gamma = T::from_f64_lossy(config.transverse_strength);
    let total = T::from_f64_lossy(config.total_time);
    let h = total / T::from_count(config.steps);
    let half = T::from_f64_lossy(0.5);
    let sixth = T::one() / T::from_count(6);

    let mut k1 = vec![Complex::new(T::zero(), T::zero()); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let mut max_drift = T::zero();

    for step in 0..config.steps {
        let t = h * T::from_count(step);
        let s0 = t / total;
        let s_mid = (t + h * half) / total;
        let s1 = (t + h) / total;

        schrodinger_rhs(&diag, gamma, s0, &psi, n, &mut k1);
        for k in 0..dim {
            tmp[k] = psi[k] + k1[k] * (h * half);
        }
        schrodinger_rhs(&diag, gamma, s_mid, &tmp, n, &mut k2);
        for k in 0..dim {
            tmp[k] = psi[k] + k2[k] * (h * half);
        }
        schrodinger_rhs(&diag, gamma, s_mid, &tmp, n, &mut k3);
        for k in 0..dim {
            tmp[k] = psi[k] + k3[k] * h;
        }
        schrodinger_rhs(&diag, gamma, s1, &tmp, n, &mut k4);
        for k in 0..dim {
            psi[k] += (k1[k] + k2[k] * T::two() + k3[k] * T::two() + k4[k]) * (h * sixth);
        }

        let drift = (norm_sq(&psi) - T::one()).abs();
        max_drift = max_drift.max(drift);
        if drift.as_f64() > NORM_FAILURE {
            return Err(Error::Integration(format!(
                "norm drift {drift} at step {} exceeds {NORM_FAILURE}; use more steps",
                step + 1
            )));
        }
    }

    let probabilities: Vec<T> = psi.iter().map(|a| a.norm_sqr()).collect();
    let energies: Vec<T> = (0..dim)
        .map(|k| model.energy_of(Bitstring::from_index(k as u64, n).as_slice()))
        .collect();
    let min = energies.iter().copied().fold(T::infinity(), T::min);
    let ground_states: Vec<usize> = (0..dim).filter(|&k| energies[k] == min).collect();
    let ground_state_probability = ground_states
        .iter()
        .fold(T::zero(), |acc, &k| acc + probabilities[k]);

    Ok(AdiabaticRun {
        probabilities,
        ground_states,
        ground_state_probability,
        max_norm_drift: max_drift,
    })
}

/// Adiabatic anneal followed by `config.shots` seeded measurements.
pub fn adiabatic_solve<T: Real>(model: &BinaryQuadraticModel<T>, config: &AdiabaticConfig) -> Result<SolveResult<T>> {
    let run = adiabatic_evolve(model, config)?;
    let n = model.num_vars();
    let cumulative: Vec<f64> = run
        .probabilities
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p.as_f64();
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("non-empty state");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counts = BTreeMap::new();
    for _ in 0..config.shots {
        let u: f64 = rng.gen::<f64>() * total;
        let k = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        *counts.entry(Bitstring::from_index(k as u64, n)).or_insert(0) += 1;
    }
    Ok(SolveResult::from_counts(
        model,
        counts,
        Some(run.ground_state_probability.as_f64()),
    ))
}
