use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qfin_core::features::{
    build_feature_qubo, correlations, select_features, CorrelationKind, CreditDataset, FeatureSelectionProblem,
};
use qfin_core::solvers::{brute_force, simulated_anneal, AnnealSchedule, SolverChoice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Applicants driven by two latent factors plus noise; the outcome leans on
/// the first factor, so features differ in relevance and redundancy.
fn dataset(m: usize, n: usize, seed: u64) -> CreditDataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let loadings: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut u = DMatrix::zeros(m, n);
    let mut v = DVector::zeros(m);
    for r in 0..m {
        let f1: f64 = rng.gen_range(-1.0..1.0);
        let f2: f64 = rng.gen_range(-1.0..1.0);
        for (c, &(a, b)) in loadings.iter().enumerate() {
            u[(r, c)] = a * f1 + b * f2 + 0.5 * rng.gen_range(-1.0..1.0);
        }
        v[r] = if f1 + 0.3 * rng.gen_range(-1.0..1.0) > 0.0 { 1.0 } else { 0.0 };
    }
    CreditDataset::new((0..n).map(|c| format!("f{c}")).collect(), u, v).unwrap()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&a| {
            let below = x.iter().filter(|&&b| b < a).count() as f64;
            let equal = x.iter().filter(|&&b| b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn column(data: &CreditDataset<f64>, c: usize) -> Vec<f64> {
    data.features().column(c).iter().copied().collect()
}

#[test]
fn correlations_match_direct_formula() {
    let data = dataset(40, 4, 11);
    let outcome: Vec<f64> = data.outcome().iter().copied().collect();
    let (rv, rho) = correlations(&data, CorrelationKind::Pearson).unwrap();
    for j in 0..4 {
        approx::assert_abs_diff_eq!(rv[j], pearson(&column(&data, j), &outcome).abs(), epsilon = 1e-12);
        for k in 0..4 {
            let expect = if j == k { 1.0 } else { pearson(&column(&data, j), &column(&data, k)).abs() };
            approx::assert_abs_diff_eq!(rho[(j, k)], expect, epsilon = 1e-12);
        }
    }
    let (rv, rho) = correlations(&data, CorrelationKind::Spearman).unwrap();
    let ro = ranks(&outcome);
    for j in 0..4 {
        approx::assert_abs_diff_eq!(rv[j], pearson(&ranks(&column(&data, j)), &ro).abs(), epsilon = 1e-12);
        let expect = pearson(&ranks(&column(&data, j)), &ranks(&column(&data, (j + 1) % 4))).abs();
        approx::assert_abs_diff_eq!(rho[(j, (j + 1) % 4)], expect, epsilon = 1e-12);
    }
}

#[test]
fn identical_columns_and_outcome_copy() {
    let u = DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 1.0, 4.0, 4.0, 1.0, 3.0, 3.0, 0.0]);
    let v = DVector::from_vec(vec![0.0, 1.0, 1.0, 0.0]);
    let data = CreditDataset::new(vec!["a".into(), "b".into(), "c".into()], u, v).unwrap();
    let (rv, rho) = correlations(&data, CorrelationKind::Pearson).unwrap();
    assert_eq!(rho[(0, 1)], 1.0);
    assert_eq!(rv[2], 1.0);
}

#[test]
fn constant_column_is_named_in_the_error() {
    let u = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
    let v = DVector::from_vec(vec![0.0, 1.0, 1.0]);
    let data = CreditDataset::new(vec!["income".into(), "flat".into()], u, v).unwrap();
    let err = correlations(&data, CorrelationKind::Pearson).unwrap_err();
    assert!(err.to_string().contains("flat"), "{err}");
}

#[test]
fn limits_of_the_trade_off() {
    let data = dataset(50, 6, 2);
    let bf = SolverChoice::BruteForce;
    let all = select_features(&data, 1.0, CorrelationKind::Pearson, &bf).unwrap();
    assert_eq!(all.selected.len(), 6);
    let none = select_features(&data, 0.0, CorrelationKind::Pearson, &bf).unwrap();
    assert!(none.selected.is_empty());
    assert_eq!(none.energy, 0.0);
}

#[test]
fn duplicate_pair_keeps_one() {
    let rho = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let p = FeatureSelectionProblem::new(DVector::from_vec(vec![0.8, 0.8]), rho, 0.5).unwrap();
    let model = build_feature_qubo(&p).unwrap();
    let r = brute_force(&model).unwrap();
    assert_eq!(r.best.count_ones(), 1);
    approx::assert_abs_diff_eq!(r.best_energy, -0.4, epsilon = 1e-15);
    approx::assert_abs_diff_eq!(
        model.energy(&qfin_core::Bitstring::new(vec![1, 1]).unwrap()).unwrap(),
        0.2,
        epsilon = 1e-15
    );
}

#[test]
fn independent_features_are_all_selected() {
    // Orthogonal ±1 columns (Hadamard rows) have zero mutual correlation.
    let h = [
        [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0],
    ];
    let u = DMatrix::from_fn(8, 4, |r, c| h[c + 1][r]);
    let v = DVector::from_fn(8, |r, _| h[1][r] + h[2][r] + h[3][r] + h[4][r]);
    let data = CreditDataset::new((0..4).map(|c| format!("x{c}")).collect(), u, v).unwrap();
    let (_, rho) = correlations(&data, CorrelationKind::Pearson).unwrap();
    approx::assert_abs_diff_eq!(rho[(0, 1)], 0.0, epsilon = 1e-15);
    let sel = select_features(&data, 0.5, CorrelationKind::Pearson, &SolverChoice::BruteForce).unwrap();
    assert_eq!(sel.selected.len(), 4);
}

#[test]
fn single_informative_feature_is_selected() {
    let u = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 5.0]);
    let v = DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]);
    let data = CreditDataset::new(vec!["only".into()], u, v).unwrap();
    let sel = select_features(&data, 0.5, CorrelationKind::Pearson, &SolverChoice::BruteForce).unwrap();
    assert_eq!(sel.selected.len(), 1);
    assert_eq!(sel.selected[0].name, "only");
}

#[test]
fn subset_size_grows_with_alpha() {
    for seed in 0..10 {
        let data = dataset(60, 8, 300 + seed);
        let sizes: Vec<usize> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&a| {
                select_features(&data, a, CorrelationKind::Pearson, &SolverChoice::BruteForce)
                    .unwrap()
                    .selected
                    .len()
            })
            .collect();
        for w in sizes.windows(2) {
            assert!(w[1] >= w[0], "seed {seed}: {sizes:?}");
        }
    }
}

#[test]
fn relabeling_permutes_the_optimum() {
    let data = dataset(50, 7, 8);
    let perm = [3usize, 0, 6, 1, 5, 2, 4];
    let u = DMatrix::from_fn(50, 7, |r, c| data.features()[(r, perm[c])]);
    let names = perm.iter().map(|&c| data.feature_names()[c].clone()).collect();
    let shuffled = CreditDataset::new(names, u, data.outcome().clone()).unwrap();
    let a = select_features(&data, 0.6, CorrelationKind::Pearson, &SolverChoice::BruteForce).unwrap();
    let b = select_features(&shuffled, 0.6, CorrelationKind::Pearson, &SolverChoice::BruteForce).unwrap();
    approx::assert_abs_diff_eq!(a.energy, b.energy, epsilon = 1e-12);
    let mut na: Vec<_> = a.selected.iter().map(|s| s.name.clone()).collect();
    let mut nb: Vec<_> = b.selected.iter().map(|s| s.name.clone()).collect();
    na.sort();
    nb.sort();
    assert_eq!(na, nb);
}

#[test]
fn annealing_finds_the_ten_feature_optimum() {
    let data = dataset(80, 10, 21);
    let bf = select_features(&data, 0.5, CorrelationKind::Pearson, &SolverChoice::BruteForce).unwrap();
    let sa = select_features(
        &data,
        0.5,
        CorrelationKind::Pearson,
        &SolverChoice::SimulatedAnnealing(AnnealSchedule::new(1000, 16, 4)),
    )
    .unwrap();
    assert_eq!(sa.bits, bf.bits);
    // Ranked by outcome correlation.
    for w in bf.selected.windows(2) {
        assert!(w[0].outcome_correlation >= w[1].outcome_correlation);
    }
}

#[test]
fn annealing_matches_brute_force_across_seeds() {
    let mut hits = 0;
    for seed in 0..100 {
        let data = dataset(40, 14, 5000 + seed);
        let (rv, rho) = correlations(&data, CorrelationKind::Pearson).unwrap();
        let model = build_feature_qubo(&FeatureSelectionProblem::new(rv, rho, 0.5).unwrap()).unwrap();
        let exact = brute_force(&model).unwrap();
        let sa = simulated_anneal(&model, &AnnealSchedule::new(500, 16, seed)).unwrap();
        if (sa.best_energy - exact.best_energy).abs() <= 1e-9 {
            hits += 1;
        }
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn problem_validation() {
    let rho = DMatrix::<f64>::identity(2, 2);
    let rv = DVector::from_vec(vec![0.5, 0.5]);
    assert!(FeatureSelectionProblem::new(rv.clone(), rho.clone(), 1.5).is_err());
    assert!(FeatureSelectionProblem::new(rv.clone(), rho.clone(), -0.1).is_err());
    let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]);
    assert!(FeatureSelectionProblem::new(rv, asym, 0.5).is_err());
    let short = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
    assert!(CreditDataset::new(vec!["a".into()], short, DVector::from_vec(vec![0.0, 1.0])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn correlation_magnitudes_are_bounded_and_symmetric(seed in 0u64..100_000, n in 1usize..6) {
        let data = dataset(12, n, seed);
        let (rv, rho) = correlations(&data, CorrelationKind::Pearson).unwrap();
        for j in 0..n {
            prop_assert!((0.0..=1.0).contains(&rv[j]));
            prop_assert_eq!(rho[(j, j)], 1.0);
            for k in 0..n {
                prop_assert!((0.0..=1.0).contains(&rho[(j, k)]));
                prop_assert_eq!(rho[(j, k)], rho[(k, j)]);
            }
        }
    }
}
