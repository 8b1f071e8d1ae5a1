//! Minimum-energy search over binary quadratic models.

mod adiabatic;
mod anneal;
mod brute;

use std::collections::BTreeMap;

use serde::Serialize;

pub use adiabatic::{adiabatic_evolve, adiabatic_solve, AdiabaticConfig, AdiabaticRun, ADIABATIC_MAX_VARS};
pub use anneal::{default_initial_temperature, simulated_anneal, AnnealSchedule};
pub use brute::{brute_force, BRUTE_FORCE_MAX_VARS};

use crate::error::Result;
use crate::qubo::{BinaryQuadraticModel, Bitstring};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample<T> {
    pub bits: Bitstring,
    pub energy: T,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult<T> {
    pub best: Bitstring,
    pub best_energy: T,
    pub samples: Vec<Sample<T>>,
    /// Only the adiabatic solver fills this in.
    pub ground_state_probability: Option<f64>,
}

impl<T: Scalar> SolveResult<T> {
    /// Builds a result from observed bitstrings, re-evaluating every energy
    /// on the model. `best` is the minimum energy, ties going to the
    /// lexicographically smallest bitstring.
    pub(crate) fn from_counts(
        model: &BinaryQuadraticModel<T>,
        counts: BTreeMap<Bitstring, usize>,
        ground_state_probability: Option<f64>,
    ) -> Self {
        let samples: Vec<Sample<T>> = counts
            .into_iter()
            .map(|(bits, multiplicity)| Sample {
                energy: model.energy_of(bits.as_slice()),
                bits,
                multiplicity,
            })
            .collect();
        // BTreeMap order is lexicographic, so the first strict minimum wins ties.
        let best = samples
            .iter()
            .fold(None::<&Sample<T>>, |acc, s| match acc {
                Some(b) if b.energy <= s.energy => Some(b),
                _ => Some(s),
            })
            .expect("at least one sample");
        Self {
            best: best.bits.clone(),
            best_energy: best.energy,
            samples: samples.clone(),
            ground_state_probability,
        }
    }

    pub fn total_shots(&self) -> usize {
        self.samples.iter().map(|s| s.multiplicity).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverChoice {
    BruteForce,
    SimulatedAnnealing(AnnealSchedule),
    Adiabatic(AdiabaticConfig),
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BruteForce => "brute",
            Self::SimulatedAnnealing(_) => "sa",
            Self::Adiabatic(_) => "adiabatic",
        }
    }
}

pub fn solve<T: Real>(model: &BinaryQuadraticModel<T>, choice: &SolverChoice) -> Result<SolveResult<T>> {
    match choice {
        SolverChoice::BruteForce => brute_force(model),
        SolverChoice::SimulatedAnnealing(schedule) => simulated_anneal(model, schedule),
        SolverChoice::Adiabatic(config) => adiabatic_solve(model, config),
    }
}

/// Tolerance used to shortlist near-minimal states before exact re-evaluation.
pub(crate) fn shortlist_tolerance<T: Scalar>(model: &BinaryQuadraticModel<T>) -> T {
    if T::EXACT {
        T::zero()
    } else {
        T::from_f64_lossy(1e-9) * (T::one() + model.abs_coefficient_sum())
    }
}
