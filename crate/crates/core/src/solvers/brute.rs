use std::collections::BTreeMap;

use super::{shortlist_tolerance, SolveResult};
use crate::error::{ensure_capacity, Result};
use crate::qubo::{BinaryQuadraticModel, Bitstring};
use crate::scalar::Scalar;

pub const BRUTE_FORCE_MAX_VARS: usize = 24;

/// Exhaustive minimisation in Gray-code order.
///
/// Every bitstring attaining the exact minimum is returned in `samples`
/// (multiplicity 1 each).
pub fn brute_force<T: Scalar>(model: &BinaryQuadraticModel<T>) -> Result<SolveResult<T>> {
    let n = model.num_vars();
    ensure_capacity("variables", n, BRUTE_FORCE_MAX_VARS)?;
    let adjacency = model.adjacency();
    let tol = shortlist_tolerance(model);

    let mut bits = vec![0u8; n];
    let mut field: Vec<T> = model.linear_terms().to_vec();
    let mut energy = model.offset();
    let mut state: u64 = 0;
    let mut best = energy;
    let mut shortlist: Vec<(u64, T)> = vec![(0, energy)];

    for g in 1u64..(1u64 << n) {
        let i = g.trailing_zeros() as usize;
        let up = bits[i] == 0;
        if up {
            energy += field[i];
        } else {
            energy -= field[i];
        }
        bits[i] ^= 1;
        state ^= 1 << i;
        for &(j, v) in &adjacency[i] {
            if up {
                field[j] += v;
            } else {
                field[j] -= v;
            }
        }

        if energy < best - tol {
            best = energy;
            shortlist.retain(|&(_, e)| e <= best + tol);
            shortlist.push((state, energy));
        } else if energy <= best + tol {
            best = best.min_of(energy);
            shortlist.push((state, energy));
        }
    }

    let exact: Vec<(Bitstring, T)> = shortlist
        .into_iter()
        .map(|(s, _)| {
            let x = Bitstring::from_index(s, n);
            let e = model.energy_of(x.as_slice());
            (x, e)
        })
        .collect();
    let min = exact
        .iter()
        .map(|(_, e)| *e)
        .fold(None, |acc: Option<T>, e| Some(acc.map_or(e, |a| a.min_of(e))))
        .expect("non-empty shortlist");
    let counts: BTreeMap<Bitstring, usize> = exact
        .into_iter()
        .filter(|(_, e)| *e == min)
        .map(|(x, _)| (x, 1))
        .collect();
    Ok(SolveResult::from_counts(model, counts, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use num_rational::Ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: direct evaluation of every bitstring.
    fn naive_minimum(model: &BinaryQuadraticModel<f64>) -> (f64, Vec<Bitstring>) {
        let n = model.num_vars();
        let mut best = f64::INFINITY;
        let mut argmin = Vec::new();
        for idx in 0..(1u64 << n) {
            let x = Bitstring::from_index(idx, n);
            let mut e = model.offset();
            for i in 0..n {
                e += model.linear(i) * f64::from(x.get(i));
                for j in i + 1..n {
                    e += model.quadratic(i, j) * f64::from(x.get(i) * x.get(j));
                }
            }
            if e < best - 1e-9 {
                best = e;
                argmin = vec![x];
            } else if (e - best).abs() <= 1e-9 {
                argmin.push(x);
            }
        }
        argmin.sort();
        (best, argmin)
    }

    fn random_model(n: usize, seed: u64) -> BinaryQuadraticModel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = BinaryQuadraticModel::new(n);
        for i in 0..n {
            m.add_linear(i, rng.gen_range(-1.0..1.0)).unwrap();
            for j in i + 1..n {
                m.add_quadratic(i, j, rng.gen_range(-1.0..1.0)).unwrap();
            }
        }
        m
    }

    #[test]
    fn single_downhill_variable() {
        let m = BinaryQuadraticModel::from_terms(1, [(0, -1.0)], [], 0.0).unwrap();
        let r = brute_force(&m).unwrap();
        assert_eq!(r.best.to_string(), "1");
        assert_eq!(r.best_energy, -1.0);
    }

    #[test]
    fn ferromagnetic_pair() {
        let m =
            BinaryQuadraticModel::from_terms(2, [(0, 1.0), (1, 1.0)], [((0, 1), -2.0)], 0.0).unwrap();
        let r = brute_force(&m).unwrap();
        // 00 and 11 are both at zero; the lexicographically smaller wins.
        assert_eq!(r.best.to_string(), "00");
        assert_eq!(r.best_energy, 0.0);
        let tied: Vec<String> = r.samples.iter().map(|s| s.bits.to_string()).collect();
        assert_eq!(tied, vec!["00", "11"]);
    }

    #[test]
    fn zero_model_reports_every_state() {
        let m = BinaryQuadraticModel::<f64>::new(3);
        let r = brute_force(&m).unwrap();
        assert_eq!(r.samples.len(), 8);
        assert_eq!(r.best.to_string(), "000");
    }

    #[test]
    fn capacity_guard() {
        let m = BinaryQuadraticModel::<f64>::new(BRUTE_FORCE_MAX_VARS + 1);
        assert!(matches!(brute_force(&m), Err(Error::Capacity { .. })));
    }

    #[test]
    fn matches_naive_oracle_on_random_16_var_models() {
        for seed in 0..4 {
            let m = random_model(16, seed);
            let (oracle_e, oracle_x) = naive_minimum(&m);
            let r = brute_force(&m).unwrap();
            assert!((r.best_energy - oracle_e).abs() < 1e-9);
            assert_eq!(r.best, oracle_x[0]);
            assert_eq!(r.best_energy, m.energy(&r.best).unwrap());
        }
    }

    #[test]
    fn exact_rationals_keep_all_degenerate_minima() {
        type Q = Ratio<i64>;
        // Antiferromagnetic triangle: six degenerate minima.
        let mut m = BinaryQuadraticModel::<Q>::new(3);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            m.add_quadratic(i, j, Q::from_integer(4)).unwrap();
        }
        for i in 0..3 {
            m.add_linear(i, Q::from_integer(-4)).unwrap();
        }
        m.add_offset(Q::from_integer(3)).unwrap();
        let r = brute_force(&m).unwrap();
        assert_eq!(r.samples.len(), 6);
        assert_eq!(r.best_energy, Q::from_integer(-1));
    }
}
