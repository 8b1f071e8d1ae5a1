//! Dense statevector simulation: gates, QFT, Grover search, amplitude
//! amplification and amplitude estimation.
//!
//! Qubit `q` is bit `q` of the basis-state index (qubit 0 is least significant).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ensure_capacity, param, Error, Result};
use crate::scalar::Real;

pub const STATEVECTOR_MAX_QUBITS: usize = 22;
pub const QAE_MAX_ANCILLAS: usize = 12;

/// Tolerance for treating a success probability as exactly 0 or 1.
const DEGENERATE_TOLERANCE: f64 = 1e-12;

pub type Gate<T> = [[Complex<T>; 2]; 2];

fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub fn hadamard<T: Real>() -> Gate<T> {
    let h = T::FRAC_1_SQRT_2();
    [[c(h), c(h)], [c(h), c(-h)]]
}

pub fn pauli_x<T: Real>() -> Gate<T> {
    [[c(T::zero()), c(T::one())], [c(T::one()), c(T::zero())]]
}

pub fn ry<T: Real>(theta: T) -> Gate<T> {
    let half = theta / T::two();
    let (s, co) = half.sin_cos();
    [[c(co), c(-s)], [c(s), c(co)]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    num_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        ensure_capacity("qubits", num_qubits, STATEVECTOR_MAX_QUBITS)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(param(format!("basis index {index} outside {dim} states")));
        }
        let mut amps = vec![c(T::zero()); dim];
        amps[index] = c(T::one());
        Ok(Self { num_qubits, amps })
    }

    pub fn uniform(num_qubits: usize) -> Result<Self> {
        let mut s = Self::zero(num_qubits)?;
        let a = c(T::one() / T::from_count(s.dim()).sqrt());
        s.amps.iter_mut().for_each(|x| *x = a);
        Ok(s)
    }

    /// Wraps amplitudes whose squared norm is 1 to within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(param(format!("{dim} amplitudes is not a power of two")));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        ensure_capacity("qubits", num_qubits, STATEVECTOR_MAX_QUBITS)?;
        let s = Self { num_qubits, amps };
        let drift = (s.norm_sqr() - T::one()).abs();
        if drift.as_f64().is_nan() || drift.as_f64() > 1e-10 {
            return Err(param(format!("amplitudes have squared norm off by {drift}")));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn probability(&self, index: usize) -> T {
        self.amps[index].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Total probability of indices satisfying `pred`.
    pub fn probability_where(&self, pred: impl Fn(usize) -> bool) -> T {
        self.amps
            .iter()
            .enumerate()
            .filter(|(k, _)| pred(*k))
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }

    pub fn scale(&mut self, factor: Complex<T>) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }

    fn check_qubit(&self, q: usize) {
        assert!(q < self.num_qubits, "qubit {q} outside {}-qubit register", self.num_qubits);
    }

    pub fn apply_gate(&mut self, q: usize, g: &Gate<T>) {
        self.apply_controlled_gate(0, q, g);
    }

    /// Applies `g` to `target` on basis states where every bit of
    /// `control_mask` is set.
    pub fn apply_controlled_gate(&mut self, control_mask: usize, target: usize, g: &Gate<T>) {
        self.check_qubit(target);
        let bit = 1usize << target;
        for k in 0..self.dim() {
            if k & bit != 0 || k & control_mask != control_mask {
                continue;
            }
            let a0 = self.amps[k];
            let a1 = self.amps[k | bit];
            self.amps[k] = g[0][0] * a0 + g[0][1] * a1;
            self.amps[k | bit] = g[1][0] * a0 + g[1][1] * a1;
        }
    }

    pub fn h(&mut self, q: usize) {
        self.apply_gate(q, &hadamard());
    }

    pub fn x(&mut self, q: usize) {
        self.apply_gate(q, &pauli_x());
    }

    pub fn ry(&mut self, q: usize, theta: T) {
        self.apply_gate(q, &ry(theta));
    }

    /// Multiplies states with both qubits set by `e^{iθ}`.
    pub fn cphase(&mut self, a: usize, b: usize, theta: T) {
        self.check_qubit(a);
        self.check_qubit(b);
        let mask = (1usize << a) | (1usize << b);
        let phase = Complex::from_polar(T::one(), theta);
        for k in 0..self.dim() {
            if k & mask == mask {
                self.amps[k] *= phase;
            }
        }
    }

    pub fn phase(&mut self, q: usize, theta: T) {
        self.cphase(q, q, theta);
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.check_qubit(a);
        self.check_qubit(b);
        if a == b {
            return;
        }
        let (ba, bb) = (1usize << a, 1usize << b);
        for k in 0..self.dim() {
            if k & ba != 0 && k & bb == 0 {
                self.amps.swap(k, k ^ ba ^ bb);
            }
        }
    }

    /// Flips the sign of `|0…0⟩`.
    pub fn reflect_zero(&mut self) {
        self.amps[0] = -self.amps[0];
    }

    /// QFT on a sub-register, `qubits[0]` being its least significant bit:
    /// `|x⟩ → 2^{-n/2} Σ_y e^{2πi·xy/2ⁿ} |y⟩`.
    pub fn qft_on(&mut self, qubits: &[usize]) {
        let n = qubits.len();
        for j in (0..n).rev() {
            self.h(qubits[j]);
            for k in (0..j).rev() {
                self.cphase(qubits[k], qubits[j], T::PI() / T::from_count(1 << (j - k)));
            }
        }
        for i in 0..n / 2 {
            self.swap(qubits[i], qubits[n - 1 - i]);
        }
    }

    pub fn inverse_qft_on(&mut self, qubits: &[usize]) {
        let n = qubits.len();
        for i in 0..n / 2 {
            self.swap(qubits[i], qubits[n - 1 - i]);
        }
        for j in 0..n {
            for k in 0..j {
                self.cphase(qubits[k], qubits[j], -T::PI() / T::from_count(1 << (j - k)));
            }
            self.h(qubits[j]);
        }
    }

    pub fn apply_qft(&mut self) {
        let all: Vec<usize> = (0..self.num_qubits).collect();
        self.qft_on(&all);
    }

    pub fn apply_inverse_qft(&mut self) {
        let all: Vec<usize> = (0..self.num_qubits).collect();
        self.inverse_qft_on(&all);
    }

    /// Seeded measurement in the computational basis.
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        sample_index(&self.probabilities(), rng)
    }
}

fn sample_index<T: Real>(probabilities: &[T], rng: &mut impl Rng) -> usize {
    let total = probabilities.iter().fold(0.0, |acc, p| acc + p.as_f64());
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (k, p) in probabilities.iter().enumerate() {
        acc += p.as_f64();
        if u < acc {
            return k;
        }
    }
    probabilities.iter().rposition(|p| !p.is_zero()).unwrap_or(0)
}

/// Phase oracle: `|k⟩ → −|k⟩` for marked `k`.
#[derive(Clone)]
pub struct Oracle {
    marked: Arc<dyn Fn(usize) -> bool + Send + Sync>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Oracle(..)")
    }
}

impl Oracle {
    pub fn new(marked: impl Fn(usize) -> bool + Send + Sync + 'static) -> Self {
        Self {
            marked: Arc::new(marked),
        }
    }

    pub fn marking(indices: impl IntoIterator<Item = usize>) -> Self {
        let set: std::collections::BTreeSet<usize> = indices.into_iter().collect();
        Self::new(move |k| set.contains(&k))
    }

    /// Marks states whose qubit `q` is 1.
    pub fn qubit_set(q: usize) -> Self {
        Self::new(move |k| k >> q & 1 == 1)
    }

    pub fn is_marked(&self, k: usize) -> bool {
        (self.marked)(k)
    }

    pub fn count_marked(&self, dim: usize) -> usize {
        (0..dim).filter(|&k| self.is_marked(k)).count()
    }

    pub fn apply<T: Real>(&self, state: &mut StateVector<T>) {
        for (k, a) in state.amps.iter_mut().enumerate() {
            if (self.marked)(k) {
                *a = -*a;
            }
        }
    }
}

/// A state-preparation unitary `A` together with its adjoint.
pub trait StatePreparation<T: Real>: Sync {
    fn num_qubits(&self) -> usize;
    fn apply(&self, state: &mut StateVector<T>);
    fn apply_adjoint(&self, state: &mut StateVector<T>);

    fn prepare(&self) -> Result<StateVector<T>> {
        let mut s = StateVector::zero(self.num_qubits())?;
        self.apply(&mut s);
        Ok(s)
    }
}

/// `H^⊗n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformPreparation {
    pub num_qubits: usize,
}

impl<T: Real> StatePreparation<T> for UniformPreparation {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn apply(&self, state: &mut StateVector<T>) {
        for q in 0..self.num_qubits {
            state.h(q);
        }
    }

    fn apply_adjoint(&self, state: &mut StateVector<T>) {
        StatePreparation::<T>::apply(self, state);
    }
}

/// One qubit with probability `p` of reading 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliPreparation<T> {
    angle: T,
}

impl<T: Real> BernoulliPreparation<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(param(format!("probability must lie in [0, 1], got {p}")));
        }
        Ok(Self {
            angle: T::two() * p.sqrt().asin(),
        })
    }
}

impl<T: Real> StatePreparation<T> for BernoulliPreparation<T> {
    fn num_qubits(&self) -> usize {
        1
    }

    fn apply(&self, state: &mut StateVector<T>) {
        state.ry(0, self.angle);
    }

    fn apply_adjoint(&self, state: &mut StateVector<T>) {
        state.ry(0, -self.angle);
    }
}

/// Loads real non-negative amplitudes `√pᵢ` with a Householder reflection
/// taking `|0⟩` to the target state.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeLoader<T> {
    num_qubits: usize,
    /// `v = |0⟩ − |ψ⟩` scaled so the reflection is `I − v·vᵀ`; `None` when `|ψ⟩ = |0⟩`.
    v: Option<Vec<T>>,
}

impl<T: Real> AmplitudeLoader<T> {
    pub fn from_probabilities(probabilities: &[T]) -> Result<Self> {
        let dim = probabilities.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(param(format!("need a power-of-two number (≥ 2) of probabilities, got {dim}")));
        }
        if probabilities.iter().any(|p| !(*p >= T::zero() && p.is_finite())) {
            return Err(param("probabilities must be finite and non-negative"));
        }
        let total = probabilities.iter().fold(T::zero(), |a, &p| a + p);
        if (total - T::one()).abs().as_f64() > 1e-10 {
            return Err(param(format!("probabilities sum to {total}, expected 1")));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        ensure_capacity("qubits", num_qubits, STATEVECTOR_MAX_QUBITS)?;
        let psi: Vec<T> = probabilities.iter().map(|&p| (p / total).sqrt()).collect();
        let mut v: Vec<T> = psi.iter().map(|&a| -a).collect();
        v[0] += T::one();
        let norm_sq = v.iter().fold(T::zero(), |a, &x| a + x * x);
        let v = if norm_sq.as_f64() < 1e-30 {
            None
        } else {
            let scale = (T::two() / norm_sq).sqrt();
            Some(v.into_iter().map(|x| x * scale).collect())
        };
        Ok(Self { num_qubits, v })
    }

    fn reflect_low(&self, state: &mut StateVector<T>) {
        let Some(v) = &self.v else { return };
        let block = v.len();
        for chunk in state.amps.chunks_mut(block) {
            let dot = v
                .iter()
                .zip(chunk.iter())
                .fold(c(T::zero()), |acc, (&vi, &a)| acc + a * vi);
            for (a, &vi) in chunk.iter_mut().zip(v) {
                *a -= dot * vi;
            }
        }
    }
}

impl<T: Real> StatePreparation<T> for AmplitudeLoader<T> {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn apply(&self, state: &mut StateVector<T>) {
        self.reflect_low(state);
    }

    fn apply_adjoint(&self, state: &mut StateVector<T>) {
        self.reflect_low(state);
    }
}

/// Loads a distribution on the low qubits, then rotates an extra top qubit
/// so that it reads 1 with probability `values[i]` given register state `i`.
/// The top qubit then reads 1 with probability `Σ pᵢ·valuesᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueEncoding<T> {
    loader: AmplitudeLoader<T>,
    angles: Vec<T>,
}

impl<T: Real> ValueEncoding<T> {
    pub fn new(probabilities: &[T], values: &[T]) -> Result<Self> {
        if probabilities.len() != values.len() {
            return Err(Error::Dimension {
                expected: probabilities.len(),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(param("encoded values must lie in [0, 1]"));
        }
        let loader = AmplitudeLoader::from_probabilities(probabilities)?;
        ensure_capacity("qubits", loader.num_qubits + 1, STATEVECTOR_MAX_QUBITS)?;
        Ok(Self {
            angles: values.iter().map(|&v| T::two() * v.sqrt().asin()).collect(),
            loader,
        })
    }

    /// Predicate for the good subspace (top qubit set).
    pub fn good_states(&self) -> Oracle {
        Oracle::qubit_set(self.loader.num_qubits)
    }

    fn rotate(&self, state: &mut StateVector<T>, sign: T) {
        let n = self.loader.num_qubits;
        let top = 1usize << n;
        for (i, &theta) in self.angles.iter().enumerate() {
            let g = ry(theta * sign);
            let a0 = state.amps[i];
            let a1 = state.amps[i | top];
            state.amps[i] = g[0][0] * a0 + g[0][1] * a1;
            state.amps[i | top] = g[1][0] * a0 + g[1][1] * a1;
        }
    }
}

impl<T: Real> StatePreparation<T> for ValueEncoding<T> {
    fn num_qubits(&self) -> usize {
        self.loader.num_qubits + 1
    }

    fn apply(&self, state: &mut StateVector<T>) {
        self.loader.apply(state);
        self.rotate(state, T::one());
    }

    fn apply_adjoint(&self, state: &mut StateVector<T>) {
        self.rotate(state, -T::one());
        self.loader.apply_adjoint(state);
    }
}

/// One amplification round `Q = −A·S₀·A†·S_good`, where `S₀` flips the sign
/// of `|0⟩` and `S_good` flips the good states. The overall `−1` makes the
/// eigenphases `±2θ` with `sin²θ = p`.
pub fn grover_iterate<T: Real, P: StatePreparation<T> + ?Sized>(prep: &P, good: &Oracle, state: &mut StateVector<T>) {
    good.apply(state);
    prep.apply_adjoint(state);
    state.reflect_zero();
    prep.apply(state);
    state.scale(c(-T::one()));
}

/// Success probability after `iterations` Grover rounds from the uniform
/// superposition over `num_qubits` qubits.
pub fn grover_search<T: Real>(oracle: &Oracle, num_qubits: usize, iterations: usize) -> Result<T> {
    let prep = UniformPreparation { num_qubits };
    let mut state = StatePreparation::<T>::prepare(&prep)?;
    if oracle.count_marked(state.dim()) == 0 {
        return Err(param("oracle marks no basis state"));
    }
    for _ in 0..iterations {
        grover_iterate(&prep, oracle, &mut state);
    }
    Ok(state.probability_where(|k| oracle.is_marked(k)))
}

/// Success probability after `rounds` amplitude-amplification rounds.
pub fn qaa_amplify<T: Real, P: StatePreparation<T> + ?Sized>(prep: &P, good: &Oracle, rounds: usize) -> Result<T> {
    let mut state = prep.prepare()?;
    let p = state.probability_where(|k| good.is_marked(k));
    if p.as_f64() <= DEGENERATE_TOLERANCE || p.as_f64() >= 1.0 - DEGENERATE_TOLERANCE {
        return Err(Error::DegenerateAmplitude(format!(
            "initial success probability {p} leaves nothing to amplify"
        )));
    }
    for _ in 0..rounds {
        grover_iterate(prep, good, &mut state);
    }
    Ok(state.probability_where(|k| good.is_marked(k)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QaeResult<T> {
    /// `sin²(π·y/M)`
    pub estimate: T,
    pub ancillas: usize,
    pub grid_index: usize,
    /// `M = 2^m` (controlled `Q` applications plus one preparation).
    pub evaluations: usize,
    /// `2π√(p̃(1−p̃))/M + π²/M²`
    pub error_bound: T,
    /// Same first term with `π²/M` as the second.
    pub loose_error_bound: T,
}

pub fn grid_estimate<T: Real>(y: usize, m: usize) -> T {
    let s = (T::PI() * T::from_count(y) / T::from_count(1 << m)).sin();
    s * s
}

/// `2π√(p(1−p))/M + π²/M²`
pub fn qae_error_bound<T: Real>(p: T, m: usize) -> T {
    let big_m = T::from_count(1 << m);
    let pi = T::PI();
    T::two() * pi * (p * (T::one() - p)).max(T::zero()).sqrt() / big_m + pi * pi / (big_m * big_m)
}

/// `2π√(p(1−p))/M + π²/M`
pub fn qae_loose_error_bound<T: Real>(p: T, m: usize) -> T {
    let big_m = T::from_count(1 << m);
    let pi = T::PI();
    T::two() * pi * (p * (T::one() - p)).max(T::zero()).sqrt() / big_m + pi * pi / big_m
}

/// Phase-estimation circuit over `Q`, simulated once; repeated measurements
/// are then seeded draws from the ancilla distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeEstimation<T> {
    ancillas: usize,
    outcome_probabilities: Vec<T>,
}

impl<T: Real> AmplitudeEstimation<T> {
    pub fn new<P: StatePreparation<T> + ?Sized>(prep: &P, good: &Oracle, ancillas: usize) -> Result<Self> {
        if ancillas == 0 {
            return Err(param("at least one ancilla qubit is required"));
        }
        ensure_capacity("ancilla qubits", ancillas, QAE_MAX_ANCILLAS)?;
        let k = prep.num_qubits();
        ensure_capacity("qubits", k + ancillas, STATEVECTOR_MAX_QUBITS)?;
        let big_m = 1usize << ancillas;

        // After the Hadamards and controlled powers the joint state is
        // M^{-1/2} Σ_y |y⟩ ⊗ Q^y|ψ⟩; build it block by block.
        let mut block = prep.prepare()?;
        let norm = c(T::one() / T::from_count(big_m).sqrt());
        let mut amps = Vec::with_capacity(big_m << k);
        for y in 0..big_m {
            if y > 0 {
                grover_iterate(prep, good, &mut block);
            }
            amps.extend(block.amplitudes().iter().map(|&a| a * norm));
        }
        let mut joint = StateVector {
            num_qubits: k + ancillas,
            amps,
        };
        let register: Vec<usize> = (k..k + ancillas).collect();
        joint.inverse_qft_on(&register);

        let block_len = 1usize << k;
        let outcome_probabilities = joint
            .amps
            .chunks(block_len)
            .map(|chunk| chunk.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()))
            .collect();
        Ok(Self {
            ancillas,
            outcome_probabilities,
        })
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    /// Probability of reading each grid index `y`.
    pub fn outcome_probabilities(&self) -> &[T] {
        &self.outcome_probabilities
    }

    pub fn result_for(&self, y: usize) -> QaeResult<T> {
        let m = self.ancillas;
        let estimate = grid_estimate(y, m);
        QaeResult {
            estimate,
            ancillas: m,
            grid_index: y,
            evaluations: 1 << m,
            error_bound: qae_error_bound(estimate, m),
            loose_error_bound: qae_loose_error_bound(estimate, m),
        }
    }

    pub fn sample(&self, seed: u64) -> QaeResult<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.result_for(sample_index(&self.outcome_probabilities, &mut rng))
    }
}

pub fn qae_estimate<T: Real, P: StatePreparation<T> + ?Sized>(
    prep: &P,
    good: &Oracle,
    ancillas: usize,
    seed: u64,
) -> Result<QaeResult<T>> {
    Ok(AmplitudeEstimation::new(prep, good, ancillas)?.sample(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn qft_of_zero_is_uniform() {
        let mut s = StateVector::<f64>::zero(4).unwrap();
        s.apply_qft();
        for a in s.amplitudes() {
            assert!(close(a.re, 0.25, 1e-12) && close(a.im, 0.0, 1e-12));
        }
    }

    #[test]
    fn qft_matches_dense_dft() {
        let n = 3;
        let dim = 8;
        for x in 0..dim {
            let mut s = StateVector::<f64>::basis(n, x).unwrap();
            s.apply_qft();
            for y in 0..dim {
                let angle = 2.0 * std::f64::consts::PI * (x * y) as f64 / dim as f64;
                let expected = Complex::from_polar(1.0 / (dim as f64).sqrt(), angle);
                assert!((s.amplitudes()[y] - expected).norm() < 1e-12, "x={x} y={y}");
            }
        }
    }

    #[test]
    fn inverse_qft_undoes_qft() {
        let mut s = StateVector::<f64>::zero(4).unwrap();
        s.ry(0, 0.3);
        s.h(2);
        s.cphase(0, 3, 1.1);
        let before = s.clone();
        s.apply_qft();
        s.apply_inverse_qft();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn grover_small_cases() {
        let p: f64 = grover_search(&Oracle::marking([2]), 2, 1).unwrap();
        assert!(close(p, 1.0, 1e-12));
        let p: f64 = grover_search(&Oracle::marking([1, 5, 6]), 3, 0).unwrap();
        assert!(close(p, 3.0 / 8.0, 1e-12));
        let p: f64 = grover_search(&Oracle::marking([11]), 4, 3).unwrap();
        assert!(close(p, (7.0 * 0.25f64.asin()).sin().powi(2), 1e-12));
        assert!(close(p, 0.9613, 1e-4));
        assert!(grover_search::<f64>(&Oracle::marking([]), 3, 1).is_err());
    }

    #[test]
    fn amplification_closed_form() {
        let good = Oracle::qubit_set(0);
        let half = BernoulliPreparation::new(0.5).unwrap();
        assert!(close(qaa_amplify::<f64, _>(&half, &good, 0).unwrap(), 0.5, 1e-12));
        assert!(close(qaa_amplify::<f64, _>(&half, &good, 1).unwrap(), 0.5, 1e-12));
        let tenth = BernoulliPreparation::new(0.1).unwrap();
        let expected = (5.0 * 0.1f64.sqrt().asin()).sin().powi(2);
        let got: f64 = qaa_amplify(&tenth, &good, 2).unwrap();
        assert!(close(got, expected, 1e-12));
        assert!(close(got, 0.99856, 1e-9));
        for p in [0.0, 1.0] {
            let prep = BernoulliPreparation::new(p).unwrap();
            assert!(matches!(
                qaa_amplify::<f64, _>(&prep, &good, 1),
                Err(Error::DegenerateAmplitude(_))
            ));
        }
    }

    #[test]
    fn qae_exact_cases() {
        let good = Oracle::qubit_set(0);
        for (p, m, expected) in [(0.0, 4, 0.0), (1.0, 4, 1.0)] {
            let prep = BernoulliPreparation::new(p).unwrap();
            let qae = AmplitudeEstimation::<f64>::new(&prep, &good, m).unwrap();
            for seed in 0..20 {
                assert!(close(qae.sample(seed).estimate, expected, 1e-12));
            }
        }
        let prep = BernoulliPreparation::new(0.5).unwrap();
        let qae = AmplitudeEstimation::<f64>::new(&prep, &good, 3).unwrap();
        let probs = qae.outcome_probabilities();
        assert!(close(probs[2] + probs[6], 1.0, 1e-12));
        for seed in 0..20 {
            let r = qae.sample(seed);
            assert!([2, 6].contains(&r.grid_index));
            assert!(close(r.estimate, 0.5, 1e-12));
        }
    }

    #[test]
    fn qae_guards() {
        let prep = BernoulliPreparation::new(0.3).unwrap();
        let good = Oracle::qubit_set(0);
        assert!(AmplitudeEstimation::<f64>::new(&prep, &good, 0).is_err());
        assert!(matches!(
            AmplitudeEstimation::<f64>::new(&prep, &good, 13),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn loader_prepares_target_distribution() {
        let probs = [0.1, 0.2, 0.3, 0.4];
        let loader = AmplitudeLoader::from_probabilities(&probs).unwrap();
        let s: StateVector<f64> = loader.prepare().unwrap();
        for (k, p) in probs.iter().enumerate() {
            assert!(close(s.probability(k), *p, 1e-12));
        }
        let mut back = s.clone();
        loader.apply_adjoint(&mut back);
        assert!(close(back.probability(0), 1.0, 1e-12));
        let trivial = AmplitudeLoader::from_probabilities(&[1.0, 0.0]).unwrap();
        assert!(close(trivial.prepare().unwrap().probability(0), 1.0, 1e-15));
    }

    #[test]
    fn value_encoding_success_probability() {
        let probs = [0.25, 0.25, 0.5, 0.0];
        let values = [0.0, 1.0, 0.5, 0.9];
        let enc = ValueEncoding::new(&probs, &values).unwrap();
        let s: StateVector<f64> = enc.prepare().unwrap();
        let good = enc.good_states();
        assert!(close(s.probability_where(|k| good.is_marked(k)), 0.5, 1e-12));
        let mut back = s.clone();
        enc.apply_adjoint(&mut back);
        assert!(close(back.probability(0), 1.0, 1e-12));
    }

    #[test]
    fn gates_preserve_norm() {
        let mut s = StateVector::<f64>::uniform(3).unwrap();
        s.ry(1, 0.7);
        s.cphase(0, 2, 0.4);
        s.swap(0, 2);
        s.apply_controlled_gate(0b010, 0, &hadamard());
        Oracle::marking([3]).apply(&mut s);
        assert!(close(s.norm_sqr(), 1.0, 1e-12));
    }
}
