use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::SolveResult;
use crate::error::{param, Result};
use crate::qubo::{BinaryQuadraticModel, Bitstring};
use crate::rng::stream;
use crate::scalar::Real;

/// Geometric cooling schedule for Metropolis single-flip annealing.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    /// `None` picks [`default_initial_temperature`].
    pub initial_temperature: Option<f64>,
    pub cooling_ratio: f64,
    pub sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl AnnealSchedule {
    /// Cools by a factor of 1000 over the requested sweeps.
    pub fn new(sweeps: usize, restarts: usize, seed: u64) -> Self {
        let cooling_ratio = if sweeps > 0 {
            1e-3f64.powf(1.0 / sweeps as f64)
        } else {
            0.5
        };
        Self {
            initial_temperature: None,
            cooling_ratio,
            sweeps,
            restarts,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t0) = self.initial_temperature {
            if !(t0 > 0.0 && t0.is_finite()) {
                return Err(param(format!("initial temperature must be positive, got {t0}")));
            }
        }
        if !(self.cooling_ratio > 0.0 && self.cooling_ratio < 1.0) {
            return Err(param(format!(
                "cooling ratio must lie in (0, 1), got {}",
                self.cooling_ratio
            )));
        }
        if self.sweeps == 0 {
            return Err(param("sweeps must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(param("restarts must be at least 1"));
        }
        Ok(())
    }
}

fn local_fields<T: Real>(model: &BinaryQuadraticModel<T>, adjacency: &[Vec<(usize, T)>], bits: &[u8]) -> Vec<T> {
    (0..model.num_vars())
        .map(|i| {
            adjacency[i]
                .iter()
                .filter(|(j, _)| bits[*j] == 1)
                .fold(model.linear(i), |acc, &(_, v)| acc + v)
        })
        .collect()
}

/// Largest single-flip |ΔE| seen over 100 random states.
pub fn default_initial_temperature<T: Real>(model: &BinaryQuadraticModel<T>, seed: u64) -> f64 {
    let n = model.num_vars();
    let adjacency = model.adjacency();
    let mut rng = stream(seed, u64::MAX);
    let mut max_delta = 0.0f64;
    for _ in 0..100 {
        let bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
        for f in local_fields(model, &adjacency, &bits) {
            max_delta = max_delta.max(f.as_f64().abs());
        }
    }
    if max_delta > 0.0 {
        max_delta
    } else {
        1.0
    }
}

fn anneal_once<T: Real>(
    model: &BinaryQuadraticModel<T>,
    adjacency: &[Vec<(usize, T)>],
    schedule: &AnnealSchedule,
    t0: f64,
    restart: usize,
) -> Bitstring {
    let n = model.num_vars();
    let mut rng = stream(schedule.seed, restart as u64);
    let mut bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
    let mut field = local_fields(model, adjacency, &bits);
    let mut energy = model.energy_of(&bits);
    let mut best_energy = energy;
    let mut best_bits = bits.clone();

    let mut temperature = t0;
    for _ in 0..schedule.sweeps {
        let beta = T::from_f64_lossy(1.0 / temperature);
        for i in 0..n {
            let up = bits[i] == 0;
            let delta = if up { field[i] } else { -field[i] };
            let u: f64 = rng.gen();
            let accept = delta <= T::zero() || T::from_f64_lossy(u) < (-delta * beta).exp();
            if !accept {
                continue;
            }
            bits[i] ^= 1;
            energy += delta;
            for &(j, v) in &adjacency[i] {
                if up {
                    field[j] += v;
                } else {
                    field[j] -= v;
                }
            }
            if energy < best_energy {
                best_energy = energy;
                best_bits.copy_from_slice(&bits);
            }
        }
        temperature *= schedule.cooling_ratio;
    }
    Bitstring::new(best_bits).expect("bits are 0/1")
}

/// Metropolis single-bit-flip annealing with geometric cooling.
///
/// Each restart draws from its own ChaCha stream `(seed, restart)`, so
/// parallel and serial execution agree bit for bit. Each restart contributes
/// its best visited state to `samples`.
pub fn simulated_anneal<T: Real>(model: &BinaryQuadraticModel<T>, schedule: &AnnealSchedule) -> Result<SolveResult<T>> {
    schedule.validate()?;
    let adjacency = model.adjacency();
    let t0 = schedule
        .initial_temperature
        .unwrap_or_else(|| default_initial_temperature(model, schedule.seed));
    let finals: Vec<Bitstring> = (0..schedule.restarts)
        .into_par_iter()
        .map(|r| anneal_once(model, &adjacency, schedule, t0, r))
        .collect();
    let mut counts = BTreeMap::new();
    for x in finals {
        *counts.entry(x).or_insert(0) += 1;
    }
    Ok(SolveResult::from_counts(model, counts, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::brute_force;

    #[test]
    fn single_variable_flips_downhill() {
        let m = BinaryQuadraticModel::from_terms(1, [(0, -1.0)], [], 0.0).unwrap();
        for seed in 0..5 {
            let r = simulated_anneal(&m, &AnnealSchedule::new(10, 2, seed)).unwrap();
            assert_eq!(r.best.to_string(), "1");
        }
    }

    #[test]
    fn zero_model_has_zero_energy() {
        let m = BinaryQuadraticModel::<f64>::new(4);
        let r = simulated_anneal(&m, &AnnealSchedule::new(5, 3, 1)).unwrap();
        assert_eq!(r.best_energy, 0.0);
        assert_eq!(r.total_shots(), 3);
    }

    #[test]
    fn schedule_validation() {
        let mut s = AnnealSchedule::new(10, 1, 0);
        s.cooling_ratio = 1.0;
        assert!(s.validate().is_err());
        let mut s = AnnealSchedule::new(10, 1, 0);
        s.restarts = 0;
        assert!(s.validate().is_err());
        let mut s = AnnealSchedule::new(10, 1, 0);
        s.initial_temperature = Some(-1.0);
        assert!(s.validate().is_err());
        assert!(AnnealSchedule::new(0, 1, 0).validate().is_err());
    }

    #[test]
    fn deterministic_and_audited() {
        let m = BinaryQuadraticModel::from_terms(
            4,
            [(0, 0.5), (1, -1.0), (2, 0.25), (3, -0.75)],
            [((0, 1), -1.5), ((1, 2), 2.0), ((2, 3), -0.5), ((0, 3), 1.0)],
            0.0,
        )
        .unwrap();
        let s = AnnealSchedule::new(50, 8, 42);
        let a = simulated_anneal(&m, &s).unwrap();
        let b = simulated_anneal(&m, &s).unwrap();
        assert_eq!(a, b);
        for sample in &a.samples {
            assert_eq!(sample.energy, m.energy(&sample.bits).unwrap());
        }
        assert_eq!(a.best_energy, brute_force(&m).unwrap().best_energy);
    }
}
