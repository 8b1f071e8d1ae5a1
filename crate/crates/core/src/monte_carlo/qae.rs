//! Expectation estimation on a discretised payoff, classically and with
//! amplitude estimation.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::estimate::{chebyshev_samples, pairwise_sum, McEstimate};
use crate::error::{ensure_capacity, param, Error, Result};
use crate::quantum::{qae_error_bound, AmplitudeEstimation, StatePreparation, ValueEncoding, QAE_MAX_ANCILLAS};
use crate::rng::{derive_seed, open_uniform, stream};
use crate::scalar::Real;

/// Largest register for a discretised distribution.
pub const DISTRIBUTION_MAX_QUBITS: usize = 8;

/// `2ⁿ` payoff points affinely mapped into `[0, 1]` by `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretizedDistribution<T> {
    values: Vec<T>,
    probabilities: Vec<T>,
    lo: T,
    hi: T,
}

impl<T: Real> DiscretizedDistribution<T> {
    /// Rescaled values with the map back to payoff units.
    pub fn new(values: Vec<T>, probabilities: Vec<T>, lo: T, hi: T) -> Result<Self> {
        let len = probabilities.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(param(format!("need 2^n (n ≥ 1) points, got {len}")));
        }
        ensure_capacity("distribution qubits", len.trailing_zeros() as usize, DISTRIBUTION_MAX_QUBITS)?;
        if values.len() != len {
            return Err(Error::Dimension {
                expected: len,
                actual: values.len(),
            });
        }
        if probabilities.iter().any(|p| !(*p >= T::zero() && p.is_finite())) {
            return Err(param("probabilities must be finite and non-negative"));
        }
        let total = pairwise_sum(&probabilities);
        if (total - T::one()).abs().as_f64() > 1e-12 {
            return Err(param(format!("probabilities sum to {total}, expected 1")));
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(param(format!("rescale bounds need lo < hi, got ({lo}, {hi})")));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::Encoding(format!("rescaled value {v} lies outside [0, 1]")));
        }
        Ok(Self {
            values,
            probabilities,
            lo,
            hi,
        })
    }

    /// Rescales raw payoffs with `(lo, hi) = (min, max)`; a constant payoff
    /// uses `hi = lo + 1`.
    pub fn from_payoffs(payoffs: &[T], probabilities: Vec<T>) -> Result<Self> {
        if payoffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("payoffs must be finite".into()));
        }
        let lo = payoffs.iter().copied().fold(T::infinity(), T::min);
        let mut hi = payoffs.iter().copied().fold(T::neg_infinity(), T::max);
        if hi <= lo {
            hi = lo + T::one();
        }
        let values = payoffs
            .iter()
            .map(|&v| ((v - lo) / (hi - lo)).max(T::zero()).min(T::one()))
            .collect();
        Self::new(values, probabilities, lo, hi)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn bounds(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn num_qubits(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    /// `Σ pᵢ·vᵢ` in rescaled units.
    pub fn mean(&self) -> T {
        let terms: Vec<T> = self
            .values
            .iter()
            .zip(&self.probabilities)
            .map(|(&v, &p)| v * p)
            .collect();
        pairwise_sum(&terms)
    }

    /// Variance in rescaled units.
    pub fn variance(&self) -> T {
        let mu = self.mean();
        let terms: Vec<T> = self
            .values
            .iter()
            .zip(&self.probabilities)
            .map(|(&v, &p)| p * (v - mu) * (v - mu))
            .collect();
        pairwise_sum(&terms)
    }

    pub fn to_payoff(&self, rescaled: T) -> T {
        self.lo + (self.hi - self.lo) * rescaled
    }

    pub fn payoff_mean(&self) -> T {
        self.to_payoff(self.mean())
    }

    /// Mean of `k` classical draws (rescaled units) from stream `(seed, index)`.
    pub fn sample_mean(&self, k: usize, seed: u64, index: u64) -> T {
        let cumulative: Vec<f64> = self
            .probabilities
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p.as_f64();
                Some(*acc)
            })
            .collect();
        let last = self.probabilities.iter().rposition(|p| *p > T::zero()).unwrap_or(0);
        let mut rng = stream(seed, index);
        let draws: Vec<T> = (0..k)
            .map(|_| {
                let u = open_uniform(&mut rng);
                let i = cumulative.partition_point(|&c| c <= u).min(last);
                self.values[i]
            })
            .collect();
        pairwise_sum(&draws) / T::from_count(k.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binning {
    #[default]
    EqualWidth,
    EqualProbability,
}

/// Discounted call payoff on a GBM terminal price, discretised on `2ⁿ` bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LognormalCall {
    pub initial_price: f64,
    pub rate: f64,
    pub volatility: f64,
    pub maturity: f64,
    pub strike: f64,
    pub qubits: usize,
    pub binning: Binning,
}

impl LognormalCall {
    /// Distribution used to compare classical and amplitude-estimation costs.
    pub fn reference() -> Self {
        Self {
            initial_price: 100.0,
            rate: 0.0,
            volatility: 0.2,
            maturity: 1.0,
            strike: 100.0,
            qubits: 3,
            binning: Binning::EqualWidth,
        }
    }

    /// Equal-width bins span `ln S_T ∈ μ ± 3σ` with probabilities from the
    /// lognormal CDF, renormalised to the window; points are bin midpoints.
    /// Equal-probability bins take the `(i + ½)/2ⁿ` quantiles.
    pub fn discretize<T: Real>(&self) -> Result<DiscretizedDistribution<T>> {
        if !(self.initial_price > 0.0 && self.volatility > 0.0 && self.maturity > 0.0) {
            return Err(param("lognormal discretisation needs positive price, volatility and maturity"));
        }
        if self.qubits == 0 {
            return Err(param("at least one qubit is required"));
        }
        ensure_capacity("distribution qubits", self.qubits, DISTRIBUTION_MAX_QUBITS)?;
        let bins = 1usize << self.qubits;
        let mu = self.initial_price.ln() + (self.rate - 0.5 * self.volatility * self.volatility) * self.maturity;
        let sigma = self.volatility * self.maturity.sqrt();
        let normal = Normal::new(mu, sigma).map_err(|e| param(e.to_string()))?;
        let (points, probabilities): (Vec<f64>, Vec<f64>) = match self.binning {
            Binning::EqualWidth => {
                let lo = (mu - 3.0 * sigma).exp();
                let hi = (mu + 3.0 * sigma).exp();
                let edge = |i: usize| lo + (hi - lo) * i as f64 / bins as f64;
                let mass: Vec<f64> = (0..bins)
                    .map(|i| normal.cdf(edge(i + 1).ln()) - normal.cdf(edge(i).ln()))
                    .collect();
                let total: f64 = mass.iter().sum();
                (
                    (0..bins).map(|i| 0.5 * (edge(i) + edge(i + 1))).collect(),
                    mass.iter().map(|m| m / total).collect(),
                )
            }
            Binning::EqualProbability => (
                (0..bins)
                    .map(|i| normal.inverse_cdf((i as f64 + 0.5) / bins as f64).exp())
                    .collect(),
                vec![1.0 / bins as f64; bins],
            ),
        };
        let discount = (-self.rate * self.maturity).exp();
        let payoffs: Vec<T> = points
            .iter()
            .map(|&s| T::from_f64_lossy(discount * (s - self.strike).max(0.0)))
            .collect();
        DiscretizedDistribution::from_payoffs(&payoffs, probabilities.into_iter().map(T::from_f64_lossy).collect())
    }
}

/// Amplitude-estimation circuit for a distribution's mean, simulated once.
#[derive(Debug, Clone)]
pub struct ExpectationEstimator<T> {
    distribution: DiscretizedDistribution<T>,
    circuit: AmplitudeEstimation<T>,
}

impl<T: Real> ExpectationEstimator<T> {
    pub fn new(distribution: &DiscretizedDistribution<T>, ancillas: usize) -> Result<Self> {
        let encoding = ValueEncoding::new(&distribution.probabilities, &distribution.values)?;
        ensure_capacity("ancilla qubits", ancillas, QAE_MAX_ANCILLAS)?;
        let good = encoding.good_states();
        let circuit = AmplitudeEstimation::new(&encoding, &good, ancillas)?;
        debug_assert_eq!(StatePreparation::<T>::num_qubits(&encoding), distribution.num_qubits() + 1);
        Ok(Self {
            distribution: distribution.clone(),
            circuit,
        })
    }

    pub fn circuit(&self) -> &AmplitudeEstimation<T> {
        &self.circuit
    }

    /// Rescaled-unit estimate of one seeded run.
    pub fn rescaled_estimate(&self, seed: u64) -> T {
        self.circuit.sample(seed).estimate
    }

    /// Payoff-unit estimate. `samples` is the number of `Q` evaluations `M`;
    /// `epsilon` is the amplitude-estimation bound mapped to payoff units.
    pub fn estimate(&self, seed: u64) -> McEstimate<T> {
        let r = self.circuit.sample(seed);
        let width = self.distribution.hi - self.distribution.lo;
        let std_dev = width * (r.estimate * (T::one() - r.estimate)).max(T::zero()).sqrt();
        McEstimate {
            mean: self.distribution.to_payoff(r.estimate),
            std_dev,
            samples: r.evaluations,
            std_error: std_dev / T::from_count(r.evaluations).sqrt(),
            epsilon: width * r.error_bound,
            confidence: "P(|error| <= epsilon) >= 8/pi^2 (amplitude estimation)".into(),
            method: "amplitude estimation".into(),
        }
    }
}

pub fn qae_expectation<T: Real>(dist: &DiscretizedDistribution<T>, ancillas: usize, seed: u64) -> Result<McEstimate<T>> {
    Ok(ExpectationEstimator::new(dist, ancillas)?.estimate(seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow<T> {
    /// Classical samples `k`, or evaluations `M = 2^m`.
    pub resource: usize,
    pub error: T,
    pub kind: &'static str,
}

/// Classical RMSE over `repetitions` seeded runs for each `k`, and median
/// amplitude-estimation error over as many seeded runs for each `m`, both in
/// rescaled units against the exact mean.
pub fn convergence_study<T: Real>(
    dist: &DiscretizedDistribution<T>,
    sample_grid: &[usize],
    ancilla_grid: &[usize],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRow<T>>> {
    if repetitions == 0 {
        return Err(param("repetitions must be at least 1"));
    }
    if let Some(k) = sample_grid.iter().find(|&&k| k == 0) {
        return Err(param(format!("sample counts must be positive, got {k}")));
    }
    let exact = dist.mean();
    let classical_seed = derive_seed(seed, "classical");
    let quantum_seed = derive_seed(seed, "amplitude-estimation");
    let mut rows = Vec::new();
    for (g, &k) in sample_grid.iter().enumerate() {
        let sq: Vec<T> = (0..repetitions)
            .into_par_iter()
            .map(|r| {
                let e = dist.sample_mean(k, classical_seed, (g * repetitions + r) as u64) - exact;
                e * e
            })
            .collect();
        rows.push(ConvergenceRow {
            resource: k,
            error: (pairwise_sum(&sq) / T::from_count(repetitions)).sqrt(),
            kind: "classical",
        });
    }
    for (g, &m) in ancilla_grid.iter().enumerate() {
        let est = ExpectationEstimator::new(dist, m)?;
        let mut errors: Vec<T> = (0..repetitions)
            .map(|r| (est.rescaled_estimate(stream_seed(quantum_seed, g, r)) - exact).abs())
            .collect();
        errors.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
        rows.push(ConvergenceRow {
            resource: 1 << m,
            error: median_sorted(&errors),
            kind: "qae",
        });
    }
    Ok(rows)
}

fn stream_seed(base: u64, grid: usize, rep: usize) -> u64 {
    base ^ ((grid as u64) << 32) ^ rep as u64
}

fn median_sorted<T: Real>(sorted: &[T]) -> T {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / T::two()
    }
}

/// Plot-ready CSV with header `resource,error,kind`.
pub fn convergence_csv<T: Real>(rows: &[ConvergenceRow<T>]) -> String {
    let mut out = String::from("resource,error,kind\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.resource, r.error.to_exact_string(), r.kind));
    }
    out
}

/// Least-squares slope of `ln(error)` against `ln(resource)`; rows with zero
/// error are skipped.
pub fn log_log_slope<T: Real>(rows: &[ConvergenceRow<T>], kind: &str) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.kind == kind && r.error > T::zero())
        .map(|r| ((r.resource as f64).ln(), r.error.as_f64().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Resources needed for a target error in rescaled units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupReport<T> {
    pub epsilon: T,
    /// Chebyshev sample count `⌈10σ²/ε²⌉`.
    pub classical_samples: u64,
    /// Smallest `m` whose amplitude-estimation bound is within `epsilon`.
    pub ancillas: usize,
    pub qae_evaluations: u64,
    pub ratio: f64,
}

pub fn matched_error_resources<T: Real>(dist: &DiscretizedDistribution<T>, epsilon: T) -> Result<SpeedupReport<T>> {
    let k = chebyshev_samples(dist.variance(), epsilon)?;
    let a = dist.mean();
    let m = (1..=QAE_MAX_ANCILLAS)
        .find(|&m| qae_error_bound(a, m) <= epsilon)
        .ok_or(Error::Capacity {
            what: "ancilla qubits",
            limit: QAE_MAX_ANCILLAS,
            actual: QAE_MAX_ANCILLAS + 1,
        })?;
    let big_m = 1u64 << m;
    Ok(SpeedupReport {
        epsilon,
        classical_samples: k,
        ancillas: m,
        qae_evaluations: big_m,
        ratio: k as f64 / big_m as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_mass(at: usize) -> DiscretizedDistribution<f64> {
        let mut p = vec![0.0; 4];
        p[at] = 1.0;
        DiscretizedDistribution::new(vec![0.0, 0.25, 0.5, 1.0], p, 10.0, 20.0).unwrap()
    }

    #[test]
    fn point_masses_are_exact() {
        let top = qae_expectation(&point_mass(3), 4, 1).unwrap();
        assert_eq!(top.mean, 20.0);
        let bottom = qae_expectation(&point_mass(0), 4, 1).unwrap();
        assert_eq!(bottom.mean, 10.0);
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscretizedDistribution::new(vec![0.0; 3], vec![0.5, 0.25, 0.25], 0.0, 1.0).is_err());
        assert!(DiscretizedDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6], 0.0, 1.0).is_err());
        assert!(DiscretizedDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5], 1.0, 1.0).is_err());
        assert!(matches!(
            DiscretizedDistribution::new(vec![0.0, 1.5], vec![0.5, 0.5], 0.0, 1.0),
            Err(Error::Encoding(_))
        ));
    }

    #[test]
    fn payoff_rescaling() {
        let d = DiscretizedDistribution::<f64>::from_payoffs(&[2.0, 4.0, 6.0, 10.0], vec![0.25; 4]).unwrap();
        assert_eq!(d.bounds(), (2.0, 10.0));
        assert_eq!(d.values(), &[0.0, 0.25, 0.5, 1.0]);
        assert!((d.payoff_mean() - 5.5).abs() < 1e-12);
        let flat = DiscretizedDistribution::from_payoffs(&[3.0; 2], vec![0.5, 0.5]).unwrap();
        assert_eq!(flat.bounds(), (3.0, 4.0));
        assert_eq!(flat.variance(), 0.0);
    }

    #[test]
    fn reference_distribution_shape() {
        let d: DiscretizedDistribution<f64> = LognormalCall::reference().discretize().unwrap();
        assert_eq!(d.num_qubits(), 3);
        assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d.values()[0], 0.0);
        assert_eq!(d.values()[7], 1.0);
        let q: DiscretizedDistribution<f64> = LognormalCall {
            binning: Binning::EqualProbability,
            ..LognormalCall::reference()
        }
        .discretize()
        .unwrap();
        assert!(q.probabilities().iter().all(|&p| p == 0.125));
    }

    #[test]
    fn zero_variance_study_has_zero_error() {
        let rows = convergence_study(&point_mass(0), &[10, 100], &[2, 3], 5, 9).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.error == 0.0));
        let csv = convergence_csv(&rows);
        assert!(csv.starts_with("resource,error,kind\n10,"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let rows: Vec<ConvergenceRow<f64>> = [1usize, 10, 100]
            .iter()
            .map(|&k| ConvergenceRow {
                resource: k,
                error: 1.0 / (k as f64).sqrt(),
                kind: "classical",
            })
            .collect();
        assert!((log_log_slope(&rows, "classical").unwrap() + 0.5).abs() < 1e-12);
        assert!(log_log_slope(&rows, "qae").is_none());
    }
}
