//! Feature selection for credit scoring.
//!
//! Minimises
//!
//! ```text
//! −α·Σ_j x_j·|ρ_Vj|  +  (1 − α)·Σ_j Σ_{k≠j} x_j·x_k·|ρ_jk|
//! ```
//!
//! trading influence on the outcome against redundancy between features.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::qubo::BinaryQuadraticModel;
use crate::scalar::Real;
use crate::solvers::{solve, SolverChoice};

#[derive(Debug, Clone, PartialEq)]
pub struct CreditDataset<T: Real> {
    feature_names: Vec<String>,
    features: DMatrix<T>,
    outcome: DVector<T>,
}

impl<T: Real> CreditDataset<T> {
    /// `features` has one row per applicant and one column per feature.
    pub fn new(feature_names: Vec<String>, features: DMatrix<T>, outcome: DVector<T>) -> Result<Self> {
        let (m, n) = features.shape();
        if feature_names.len() != n {
            return Err(Error::Data(format!(
                "{} feature names for {n} columns",
                feature_names.len()
            )));
        }
        if outcome.len() != m {
            return Err(Error::Data(format!("{} outcomes for {m} applicants", outcome.len())));
        }
        if m < 3 {
            return Err(Error::Data(format!("need at least 3 applicants, got {m}")));
        }
        if n == 0 {
            return Err(Error::Data("no feature columns".into()));
        }
        for (j, name) in feature_names.iter().enumerate() {
            if let Some(i) = features.column(j).iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite value in column '{name}' row {}", i + 1)));
            }
        }
        if let Some(i) = outcome.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite outcome in row {}", i + 1)));
        }
        Ok(Self {
            feature_names,
            features,
            outcome,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &DMatrix<T> {
        &self.features
    }

    pub fn outcome(&self) -> &DVector<T> {
        &self.outcome
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_applicants(&self) -> usize {
        self.features.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    #[default]
    Pearson,
    Spearman,
}

/// Average ranks (1-based), ties sharing their mean rank.
fn ranks<T: Real>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut out = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = T::from_count(start + end + 1) / T::two();
        for &k in &order[start..end] {
            out[k] = avg;
        }
        start = end;
    }
    out
}

/// Deviations from the mean and their sum of squares.
fn centred<T: Real>(values: &[T], name: &str) -> Result<(Vec<T>, T)> {
    let n = T::from_count(values.len());
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / n;
    let dev: Vec<T> = values.iter().map(|&v| v - mean).collect();
    let ss = dev.iter().fold(T::zero(), |a, &d| a + d * d);
    if values.iter().all(|&v| v == values[0]) || ss.is_zero() {
        return Err(Error::Data(format!("column '{name}' has zero variance")));
    }
    Ok((dev, ss))
}

fn pearson<T: Real>(a: &(Vec<T>, T), b: &(Vec<T>, T)) -> T {
    let dot = a.0.iter().zip(&b.0).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    // One square root of the product keeps identical columns at exactly 1.
    (dot / (a.1 * b.1).sqrt()).abs().min(T::one())
}

/// Correlation magnitudes `(|ρ_V|, |ρ|)` between features and outcome.
pub fn correlations<T: Real>(data: &CreditDataset<T>, kind: CorrelationKind) -> Result<(DVector<T>, DMatrix<T>)> {
    let transform = |v: Vec<T>| match kind {
        CorrelationKind::Pearson => v,
        CorrelationKind::Spearman => ranks(&v),
    };
    let n = data.num_features();
    let cols: Vec<(Vec<T>, T)> = (0..n)
        .map(|j| {
            let col = transform(data.features.column(j).iter().copied().collect());
            centred(&col, &data.feature_names[j])
        })
        .collect::<Result<_>>()?;
    let outcome = centred(&transform(data.outcome.iter().copied().collect()), "outcome")?;
    let rho_v = DVector::from_fn(n, |j, _| pearson(&cols[j], &outcome));
    let rho = DMatrix::from_fn(n, n, |j, k| if j == k { T::one() } else { pearson(&cols[j.min(k)], &cols[j.max(k)]) });
    Ok((rho_v, rho))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSelectionProblem<T: Real> {
    pub rho_outcome: DVector<T>,
    pub rho: DMatrix<T>,
    pub alpha: T,
}

impl<T: Real> FeatureSelectionProblem<T> {
    pub fn new(rho_outcome: DVector<T>, rho: DMatrix<T>, alpha: T) -> Result<Self> {
        let n = rho_outcome.len();
        if rho.shape() != (n, n) {
            return Err(param(format!(
                "correlation matrix is {}x{}, expected {n}x{n}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let in_unit = |v: &T| *v >= T::zero() && *v <= T::one();
        if !rho_outcome.iter().all(in_unit) || !rho.iter().all(in_unit) {
            return Err(param("correlation magnitudes must lie in [0, 1]"));
        }
        for j in 0..n {
            if rho[(j, j)] != T::one() {
                return Err(param(format!("correlation diagonal entry {j} is not 1")));
            }
            for k in 0..j {
                if rho[(j, k)] != rho[(k, j)] {
                    return Err(param("correlation matrix is not symmetric"));
                }
            }
        }
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(param(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(Self {
            rho_outcome,
            rho,
            alpha,
        })
    }

    pub fn num_features(&self) -> usize {
        self.rho_outcome.len()
    }
}

pub fn build_feature_qubo<T: Real>(problem: &FeatureSelectionProblem<T>) -> Result<BinaryQuadraticModel<T>> {
    let n = problem.num_features();
    let alpha = problem.alpha;
    let redundancy = T::two() * (T::one() - alpha);
    let mut model = BinaryQuadraticModel::new(n);
    for j in 0..n {
        model.add_linear(j, -alpha * problem.rho_outcome[j])?;
        for k in j + 1..n {
            model.add_quadratic(j, k, redundancy * problem.rho[(j, k)])?;
        }
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedFeature<T> {
    pub name: String,
    pub column: usize,
    pub outcome_correlation: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSelection<T> {
    /// Ranked by decreasing outcome correlation, then by column.
    pub selected: Vec<SelectedFeature<T>>,
    pub alpha: T,
    pub energy: T,
    pub bits: crate::qubo::Bitstring,
}

/// Correlations, QUBO, solve and decode in one call.
pub fn select_features<T: Real>(
    data: &CreditDataset<T>,
    alpha: T,
    kind: CorrelationKind,
    solver: &SolverChoice,
) -> Result<FeatureSelection<T>> {
    let (rho_v, rho) = correlations(data, kind)?;
    let problem = FeatureSelectionProblem::new(rho_v, rho, alpha)?;
    let model = build_feature_qubo(&problem)?;
    let result = solve(&model, solver)?;
    let mut selected: Vec<SelectedFeature<T>> = (0..problem.num_features())
        .filter(|&j| result.best.get(j) == 1)
        .map(|j| SelectedFeature {
            name: data.feature_names[j].clone(),
            column: j,
            outcome_correlation: problem.rho_outcome[j],
        })
        .collect();
    selected.sort_by(|a, b| {
        b.outcome_correlation
            .partial_cmp(&a.outcome_correlation)
            .expect("finite correlations")
            .then(a.column.cmp(&b.column))
    });
    Ok(FeatureSelection {
        selected,
        alpha,
        energy: result.best_energy,
        bits: result.best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::brute_force;

    fn dataset(cols: &[&[f64]], outcome: &[f64]) -> CreditDataset<f64> {
        let m = outcome.len();
        let names = (0..cols.len()).map(|j| format!("f{j}")).collect();
        let u = DMatrix::from_fn(m, cols.len(), |i, j| cols[j][i]);
        CreditDataset::new(names, u, DVector::from_column_slice(outcome)).unwrap()
    }

    #[test]
    fn identical_columns_and_outcome_copy() {
        let a = [1.0, 3.0, 2.0, 5.0];
        let d = dataset(&[&a, &a], &a);
        let (rv, rho) = correlations(&d, CorrelationKind::Pearson).unwrap();
        assert_eq!(rho[(0, 1)], 1.0);
        assert_eq!(rv[0], 1.0);
    }

    #[test]
    fn zero_variance_column_is_named() {
        let d = CreditDataset::new(
            vec!["income".into(), "flat".into()],
            DMatrix::from_row_slice(3, 2, &[1.0, 7.0, 2.0, 7.0, 4.0, 7.0]),
            DVector::from_vec(vec![0.0, 1.0, 1.0]),
        )
        .unwrap();
        let err = correlations(&d, CorrelationKind::Pearson).unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("'flat'")), "{err}");
    }

    #[test]
    fn spearman_sees_monotone_relations() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [1.0, 8.0, 27.0, 64.0, 125.0];
        let d = dataset(&[&x], &y);
        let (sp, _) = correlations(&d, CorrelationKind::Spearman).unwrap();
        let (pe, _) = correlations(&d, CorrelationKind::Pearson).unwrap();
        assert!((sp[0] - 1.0).abs() < 1e-15);
        assert!(pe[0] < 1.0);
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn duplicate_features_pick_one() {
        let p = FeatureSelectionProblem::<f64>::new(
            DVector::from_vec(vec![0.8, 0.8]),
            DMatrix::from_element(2, 2, 1.0),
            0.5,
        )
        .unwrap();
        let m = build_feature_qubo(&p).unwrap();
        assert!((m.energy_of(&[1, 0]) + 0.4).abs() < 1e-15);
        assert!((m.energy_of(&[1, 1]) - 0.2).abs() < 1e-15);
        let r = brute_force(&m).unwrap();
        assert_eq!(r.best.count_ones(), 1);
    }

    #[test]
    fn alpha_extremes() {
        let p = |alpha| {
            FeatureSelectionProblem::<f64>::new(
                DVector::from_vec(vec![0.3, 0.6, 0.1]),
                DMatrix::from_row_slice(3, 3, &[1.0, 0.9, 0.2, 0.9, 1.0, 0.4, 0.2, 0.4, 1.0]),
                alpha,
            )
            .unwrap()
        };
        let all = brute_force(&build_feature_qubo(&p(1.0)).unwrap()).unwrap();
        assert_eq!(all.best.to_string(), "111");
        let none = brute_force(&build_feature_qubo(&p(0.0)).unwrap()).unwrap();
        assert_eq!(none.best.to_string(), "000");
        assert_eq!(none.best_energy, 0.0);
    }

    #[test]
    fn problem_validation() {
        let ok_rho = DMatrix::identity(2, 2);
        let rv = DVector::from_vec(vec![0.5, 0.5]);
        assert!(FeatureSelectionProblem::<f64>::new(rv.clone(), ok_rho.clone(), 1.5).is_err());
        assert!(FeatureSelectionProblem::<f64>::new(rv.clone(), ok_rho.clone(), -0.1).is_err());
        assert!(FeatureSelectionProblem::<f64>::new(rv.clone(), DMatrix::from_element(2, 2, 0.5), 0.5).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]);
        assert!(FeatureSelectionProblem::<f64>::new(rv.clone(), asym, 0.5).is_err());
        assert!(FeatureSelectionProblem::<f64>::new(DVector::from_vec(vec![1.2, 0.0]), ok_rho, 0.5).is_err());
    }

    #[test]
    fn dataset_validation() {
        let u = DMatrix::from_element(2, 1, 1.0);
        assert!(CreditDataset::new(vec!["a".into()], u, DVector::zeros(2)).is_err());
        let mut u = DMatrix::from_element(3, 1, 1.0);
        u[(1, 0)] = f64::NAN;
        let err = CreditDataset::new(vec!["a".into()], u, DVector::zeros(3)).unwrap_err();
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn single_informative_feature_selected() {
        let d = dataset(&[&[1.0, 2.0, 4.0, 3.0]], &[0.0, 0.0, 1.0, 1.0]);
        let sel = select_features(&d, 0.5, CorrelationKind::Pearson, &SolverChoice::BruteForce).unwrap();
        assert_eq!(sel.selected.len(), 1);
        assert_eq!(sel.selected[0].name, "f0");
        assert!(sel.energy < 0.0);
    }
}
