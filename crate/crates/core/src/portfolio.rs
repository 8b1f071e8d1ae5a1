//! Multi-period trading trajectories on an integer holdings grid.
//!
//! The return of a trajectory `w_1 … w_T` (with `w_0 = 0`, an all-cash start) is
//!
//! ```text
//! Σ_t  μ_tᵀw_t − (γ/2)·w_tᵀΣ_t w_t − Δw_tᵀΛ_tΔw_t + Δw_tᵀΛ′_t w_t,   Δw_t = w_t − w_{t−1}
//! ```
//!
//! subject to `Σ_n w_{n,t} = K` every period and `0 ≤ w_{n,t} ≤ K′`.
//! [`build_qubo`] turns the negated return into a binary quadratic model:
//! holdings use the clamped binary encoding (so `w ≤ K′` holds structurally)
//! and the budget is a squared equality penalty per period.

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_capacity, param, Error, Result};
use crate::qubo::{BinaryQuadraticModel, Bitstring, IntegerEncoding};
use crate::scalar::{Real, Scalar};

/// Binary-variable budget for exhaustively solvable trajectory problems.
pub const PORTFOLIO_MAX_BINARY_VARS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryProblem<T: Scalar> {
    num_assets: usize,
    periods: usize,
    forecast_returns: Vec<DVector<T>>,
    covariances: Vec<DMatrix<T>>,
    risk_aversion: T,
    trade_costs: Vec<DMatrix<T>>,
    impact_costs: Vec<DMatrix<T>>,
    total_holdings: u64,
    max_per_asset: u64,
}

fn check_square<T: Scalar>(m: &DMatrix<T>, n: usize, what: &str, t: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(param(format!(
            "{what} for period {} is {}x{}, expected {n}x{n}",
            t + 1,
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite_value()) {
        return Err(param(format!("{what} for period {} has non-finite entries", t + 1)));
    }
    Ok(())
}

fn is_symmetric<T: Scalar>(m: &DMatrix<T>) -> bool {
    let n = m.nrows();
    let scale = m.iter().fold(T::one(), |acc, v| acc.max_of(v.abs()));
    let tol = if T::EXACT {
        T::zero()
    } else {
        T::from_f64_lossy(1e-12) * scale
    };
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

fn smallest_eigenvalue<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let as_f64 = m.map(|v| v.as_f64());
    let sym = (&as_f64 + as_f64.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

impl<T: Scalar> TrajectoryProblem<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        forecast_returns: Vec<DVector<T>>,
        covariances: Vec<DMatrix<T>>,
        risk_aversion: T,
        trade_costs: Vec<DMatrix<T>>,
        impact_costs: Vec<DMatrix<T>>,
        total_holdings: u64,
        max_per_asset: u64,
    ) -> Result<Self> {
        let periods = forecast_returns.len();
        if periods == 0 {
            return Err(param("at least one period is required"));
        }
        let n = forecast_returns[0].len();
        if n == 0 {
            return Err(param("at least one asset is required"));
        }
        for (what, len) in [
            ("covariances", covariances.len()),
            ("trade costs", trade_costs.len()),
            ("impact costs", impact_costs.len()),
        ] {
            if len != periods {
                return Err(param(format!("{what}: got {len} periods, expected {periods}")));
            }
        }
        for (t, mu) in forecast_returns.iter().enumerate() {
            if mu.len() != n {
                return Err(param(format!(
                    "forecast returns for period {} have {} entries, expected {n}",
                    t + 1,
                    mu.len()
                )));
            }
            if mu.iter().any(|v| !v.is_finite_value()) {
                return Err(param(format!("non-finite forecast return in period {}", t + 1)));
            }
        }
        for t in 0..periods {
            check_square(&covariances[t], n, "covariance", t)?;
            check_square(&trade_costs[t], n, "trade cost", t)?;
            check_square(&impact_costs[t], n, "impact cost", t)?;
            if !is_symmetric(&covariances[t]) {
                return Err(param(format!("covariance for period {} is not symmetric", t + 1)));
            }
            let lambda_min = smallest_eigenvalue(&covariances[t]);
            if lambda_min < -1e-9 {
                return Err(param(format!(
                    "covariance for period {} is not positive semidefinite (eigenvalue {lambda_min})",
                    t + 1
                )));
            }
        }
        if !risk_aversion.is_finite_value() || risk_aversion < T::zero() {
            return Err(param(format!("risk aversion must be non-negative, got {risk_aversion}")));
        }
        if total_holdings == 0 {
            return Err(param("total holdings K must be positive"));
        }
        if max_per_asset == 0 || max_per_asset > total_holdings {
            return Err(param(format!(
                "max per asset K' must lie in [1, {total_holdings}], got {max_per_asset}"
            )));
        }
        if max_per_asset * (n as u64) < total_holdings {
            return Err(param(format!(
                "{n} assets with at most {max_per_asset} units each cannot hold {total_holdings} units"
            )));
        }
        Ok(Self {
            num_assets: n,
            periods,
            forecast_returns,
            covariances,
            risk_aversion,
            trade_costs,
            impact_costs,
            total_holdings,
            max_per_asset,
        })
    }

    /// Same `μ`, `Σ` every period; trade and impact costs are scalar
    /// multiples of the identity.
    #[allow(clippy::too_many_arguments)]
    pub fn stationary(
        mean: DVector<T>,
        covariance: DMatrix<T>,
        periods: usize,
        risk_aversion: T,
        trade_cost: T,
        impact_cost: T,
        total_holdings: u64,
        max_per_asset: u64,
    ) -> Result<Self> {
        let n = mean.len();
        let eye = |c: T| DMatrix::from_diagonal_element(n, n, c);
        Self::new(
            vec![mean; periods],
            vec![covariance; periods],
            risk_aversion,
            vec![eye(trade_cost); periods],
            vec![eye(impact_cost); periods],
            total_holdings,
            max_per_asset,
        )
    }

    pub fn num_assets(&self) -> usize {
        self.num_assets
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn total_holdings(&self) -> u64 {
        self.total_holdings
    }

    pub fn max_per_asset(&self) -> u64 {
        self.max_per_asset
    }

    pub fn risk_aversion(&self) -> T {
        self.risk_aversion
    }

    pub fn forecast_returns(&self, t: usize) -> &DVector<T> {
        &self.forecast_returns[t]
    }

    pub fn covariance(&self, t: usize) -> &DMatrix<T> {
        &self.covariances[t]
    }

    pub fn trade_cost(&self, t: usize) -> &DMatrix<T> {
        &self.trade_costs[t]
    }

    pub fn impact_cost(&self, t: usize) -> &DMatrix<T> {
        &self.impact_costs[t]
    }

    pub fn bits_per_holding(&self) -> usize {
        (64 - self.max_per_asset.leading_zeros()) as usize
    }

    pub fn num_binary_vars(&self) -> usize {
        self.periods * self.num_assets * self.bits_per_holding()
    }
}

/// Holdings `w[t][n]` in integer lots, periods `1..=T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HoldingsTrajectory {
    pub holdings: Vec<Vec<u64>>,
}

impl HoldingsTrajectory {
    pub fn new(holdings: Vec<Vec<u64>>) -> Self {
        Self { holdings }
    }

    pub fn check_feasible<T: Scalar>(&self, problem: &TrajectoryProblem<T>) -> Result<()> {
        if self.holdings.len() != problem.periods {
            return Err(Error::Validation(format!(
                "trajectory has {} periods, problem has {}",
                self.holdings.len(),
                problem.periods
            )));
        }
        for (t, w) in self.holdings.iter().enumerate() {
            if w.len() != problem.num_assets {
                return Err(Error::Validation(format!(
                    "period {} has {} holdings, expected {}",
                    t + 1,
                    w.len(),
                    problem.num_assets
                )));
            }
            let total: u64 = w.iter().sum();
            if total != problem.total_holdings {
                return Err(Error::Validation(format!(
                    "period {} holds {total} units, budget is {}",
                    t + 1,
                    problem.total_holdings
                )));
            }
            if let Some((n, &v)) = w.iter().enumerate().find(|(_, &v)| v > problem.max_per_asset) {
                return Err(Error::Validation(format!(
                    "period {} asset {n} holds {v} units, cap is {}",
                    t + 1,
                    problem.max_per_asset
                )));
            }
        }
        Ok(())
    }

    pub fn is_feasible<T: Scalar>(&self, problem: &TrajectoryProblem<T>) -> bool {
        self.check_feasible(problem).is_ok()
    }
}

fn quad_form<T: Scalar>(m: &DMatrix<T>, a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            acc += m[(i, j)] * ai * bj;
        }
    }
    acc
}

/// Return of a feasible trajectory. Infeasible input is a validation error.
pub fn trajectory_return<T: Scalar>(problem: &TrajectoryProblem<T>, traj: &HoldingsTrajectory) -> Result<T> {
    traj.check_feasible(problem)?;
    let n = problem.num_assets;
    let half_gamma = problem.risk_aversion / T::two();
    let mut prev = vec![T::zero(); n];
    let mut total = T::zero();
    for t in 0..problem.periods {
        let w: Vec<T> = traj.holdings[t]
            .iter()
            .map(|&v| T::from_u64(v).expect("holding fits scalar"))
            .collect();
        let dw: Vec<T> = w.iter().zip(&prev).map(|(&a, &b)| a - b).collect();
        let expected = problem.forecast_returns[t]
            .iter()
            .zip(&w)
            .fold(T::zero(), |acc, (&m, &x)| acc + m * x);
        total += expected - half_gamma * quad_form(&problem.covariances[t], &w, &w)
            - quad_form(&problem.trade_costs[t], &dw, &dw)
            + quad_form(&problem.impact_costs[t], &dw, &w);
        prev = w;
    }
    Ok(total)
}

/// Affine function of binary variables.
#[derive(Debug, Clone)]
struct Affine<T> {
    terms: Vec<(usize, T)>,
    constant: T,
}

impl<T: Scalar> Affine<T> {
    fn zero() -> Self {
        Self {
            terms: Vec::new(),
            constant: T::zero(),
        }
    }

    fn minus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|&(i, c)| (i, -c)));
        Self {
            terms,
            constant: self.constant - other.constant,
        }
    }
}

/// Adds `c·a·b` to the model, reducing `x_i² = x_i`.
fn add_product<T: Scalar>(model: &mut BinaryQuadraticModel<T>, c: T, a: &Affine<T>, b: &Affine<T>) -> Result<()> {
    if c.is_zero() {
        return Ok(());
    }
    for &(i, ai) in &a.terms {
        for &(j, bj) in &b.terms {
            model.add_quadratic(i, j, c * ai * bj)?;
        }
        model.add_linear(i, c * ai * b.constant)?;
    }
    for &(j, bj) in &b.terms {
        model.add_linear(j, c * a.constant * bj)?;
    }
    model.add_offset(c * a.constant * b.constant)
}

/// Maps bitstrings of the trajectory QUBO back to holdings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEncoding {
    /// `encodings[t][n]` holds the bits of `w_{n,t}`.
    pub encodings: Vec<Vec<IntegerEncoding>>,
    pub num_vars: usize,
}

impl TrajectoryEncoding {
    pub fn new(periods: usize, num_assets: usize, max_per_asset: u64) -> Result<Self> {
        let mut next = 0;
        let mut encodings = Vec::with_capacity(periods);
        for t in 0..periods {
            let mut row = Vec::with_capacity(num_assets);
            for n in 0..num_assets {
                let enc = IntegerEncoding::new(
                    format!("w[{},{}]", t + 1, n),
                    i64::try_from(max_per_asset).map_err(|_| param("K' too large"))?,
                    next,
                )?;
                next += enc.num_bits();
                row.push(enc);
            }
            encodings.push(row);
        }
        Ok(Self {
            encodings,
            num_vars: next,
        })
    }

    pub fn decode(&self, x: &Bitstring) -> HoldingsTrajectory {
        HoldingsTrajectory::new(
            self.encodings
                .iter()
                .map(|row| row.iter().map(|e| e.decode_from(x)).collect())
                .collect(),
        )
    }

    pub fn encode(&self, traj: &HoldingsTrajectory) -> Result<Bitstring> {
        let mut x = Bitstring::zeros(self.num_vars);
        for (row, w) in self.encodings.iter().zip(&traj.holdings) {
            for (enc, &v) in row.iter().zip(w) {
                enc.write_into(v, &mut x)?;
            }
        }
        Ok(x)
    }
}

/// Negated return as a QUBO (without the budget penalty).
pub fn objective_qubo<T: Scalar>(problem: &TrajectoryProblem<T>) -> Result<(BinaryQuadraticModel<T>, TrajectoryEncoding)> {
    let bits = problem.num_binary_vars();
    ensure_capacity("binary variables", bits, PORTFOLIO_MAX_BINARY_VARS)?;
    let encoding = TrajectoryEncoding::new(problem.periods, problem.num_assets, problem.max_per_asset)?;
    let mut model = BinaryQuadraticModel::new(encoding.num_vars);
    let n = problem.num_assets;
    let half_gamma = problem.risk_aversion / T::two();

    let mut prev: Vec<Affine<T>> = vec![Affine::zero(); n];
    for t in 0..problem.periods {
        let w: Vec<Affine<T>> = encoding.encodings[t]
            .iter()
            .map(|enc| Affine {
                terms: enc.terms(),
                constant: T::zero(),
            })
            .collect();
        let dw: Vec<Affine<T>> = w.iter().zip(&prev).map(|(a, b)| a.minus(b)).collect();
        for i in 0..n {
            for &(var, weight) in &w[i].terms {
                model.add_linear(var, -problem.forecast_returns[t][i] * weight)?;
            }
            for j in 0..n {
                add_product(&mut model, half_gamma * problem.covariances[t][(i, j)], &w[i], &w[j])?;
                add_product(&mut model, problem.trade_costs[t][(i, j)], &dw[i], &dw[j])?;
                add_product(&mut model, -problem.impact_costs[t][(i, j)], &dw[i], &w[j])?;
            }
        }
        prev = w;
    }
    Ok((model, encoding))
}

/// Full trajectory QUBO: negated return plus `M·(Σ_n w_{n,t} − K)²` per period.
/// `penalty = None` uses the objective's default penalty strength.
pub fn build_qubo<T: Scalar>(
    problem: &TrajectoryProblem<T>,
    penalty: Option<T>,
) -> Result<(BinaryQuadraticModel<T>, TrajectoryEncoding)> {
    let (mut model, encoding) = objective_qubo(problem)?;
    let strength = match penalty {
        Some(m) if m > T::zero() && m.is_finite_value() => m,
        Some(m) => return Err(param(format!("penalty must be positive, got {m}"))),
        None => model.default_penalty_strength(),
    };
    let k = T::from_u64(problem.total_holdings).expect("K fits scalar");
    for row in &encoding.encodings {
        let vars: Vec<(usize, T)> = row.iter().flat_map(|e| e.terms()).collect();
        model.add_equality_penalty(&vars, k, strength)?;
    }
    Ok((model, encoding))
}

/// Sample moments of log-returns.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketEstimate<T: Scalar> {
    pub mean: DVector<T>,
    pub covariance: DMatrix<T>,
}

/// Mean and unbiased covariance of `ln(P_t / P_{t−1})` from a price matrix
/// with one row per timestamp.
pub fn estimate_inputs<T: Real>(prices: &DMatrix<T>) -> Result<MarketEstimate<T>> {
    let (rows, n) = prices.shape();
    if rows < 3 {
        return Err(Error::Data(format!("need at least 3 price rows, got {rows}")));
    }
    if let Some(((r, c), p)) = prices
        .iter()
        .enumerate()
        .map(|(k, p)| ((k % rows, k / rows), p))
        .find(|(_, p)| !(**p > T::zero() && p.is_finite()))
    {
        return Err(Error::Data(format!(
            "price at row {} column {} must be positive and finite, got {p}",
            r + 1,
            c + 1
        )));
    }
    let returns = DMatrix::from_fn(rows - 1, n, |t, j| (prices[(t + 1, j)] / prices[(t, j)]).ln());
    let count = T::from_count(rows - 1);
    let mean = DVector::from_fn(n, |j, _| returns.column(j).iter().fold(T::zero(), |a, &v| a + v) / count);
    let denom = T::from_count(rows - 2);
    let mut covariance = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s = (0..rows - 1).fold(T::zero(), |acc, t| {
                acc + (returns[(t, i)] - mean[i]) * (returns[(t, j)] - mean[j])
            });
            covariance[(i, j)] = s / denom;
            covariance[(j, i)] = s / denom;
        }
    }
    Ok(MarketEstimate { mean, covariance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::brute_force;
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    fn q(n: i128, d: i128) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn single_asset_return() {
        let p = TrajectoryProblem::<f64>::stationary(
            DVector::from_vec(vec![0.1]),
            DMatrix::zeros(1, 1),
            1,
            0.0,
            0.0,
            0.0,
            3,
            3,
        )
        .unwrap();
        let r = trajectory_return(&p, &HoldingsTrajectory::new(vec![vec![3]])).unwrap();
        assert!((r - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_inputs_give_zero_return() {
        let p = TrajectoryProblem::<Q>::stationary(
            DVector::zeros(2),
            DMatrix::zeros(2, 2),
            2,
            q(0, 1),
            q(0, 1),
            q(0, 1),
            2,
            2,
        )
        .unwrap();
        for a in 0..=2u64 {
            for b in 0..=2u64 {
                let traj = HoldingsTrajectory::new(vec![vec![a, 2 - a], vec![b, 2 - b]]);
                assert_eq!(trajectory_return(&p, &traj).unwrap(), q(0, 1));
            }
        }
    }

    #[test]
    fn infeasible_trajectory_is_rejected() {
        let p = TrajectoryProblem::<f64>::stationary(
            DVector::from_vec(vec![0.1, 0.2]),
            DMatrix::zeros(2, 2),
            1,
            0.0,
            0.0,
            0.0,
            3,
            2,
        )
        .unwrap();
        for bad in [vec![vec![1, 1]], vec![vec![3, 0]], vec![vec![1, 2, 0]], vec![]] {
            let err = trajectory_return(&p, &HoldingsTrajectory::new(bad)).unwrap_err();
            assert!(matches!(err, Error::Validation(_)));
        }
    }

    #[test]
    fn problem_validation() {
        let mu = DVector::from_vec(vec![0.1, 0.2]);
        let bad_cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(TrajectoryProblem::stationary(mu.clone(), bad_cov, 1, 1.0, 0.0, 0.0, 2, 2).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(TrajectoryProblem::stationary(mu.clone(), asym, 1, 1.0, 0.0, 0.0, 2, 2).is_err());
        let cov = DMatrix::identity(2, 2);
        assert!(TrajectoryProblem::stationary(mu.clone(), cov.clone(), 1, -1.0, 0.0, 0.0, 2, 2).is_err());
        assert!(TrajectoryProblem::stationary(mu.clone(), cov.clone(), 1, 1.0, 0.0, 0.0, 0, 1).is_err());
        assert!(TrajectoryProblem::stationary(mu.clone(), cov.clone(), 1, 1.0, 0.0, 0.0, 2, 3).is_err());
        assert!(TrajectoryProblem::stationary(mu.clone(), cov.clone(), 1, 1.0, 0.0, 0.0, 5, 2).is_err());
        assert!(TrajectoryProblem::stationary(mu, DMatrix::identity(3, 3), 1, 1.0, 0.0, 0.0, 2, 2).is_err());
    }

    #[test]
    fn only_feasible_point_is_the_minimum() {
        let p = TrajectoryProblem::<Q>::stationary(
            DVector::from_vec(vec![q(1, 10)]),
            DMatrix::from_element(1, 1, q(1, 5)),
            1,
            q(1, 1),
            q(0, 1),
            q(0, 1),
            1,
            1,
        )
        .unwrap();
        let (model, enc) = build_qubo(&p, None).unwrap();
        let r = brute_force(&model).unwrap();
        assert_eq!(enc.decode(&r.best).holdings, vec![vec![1]]);
    }

    #[test]
    fn capacity_and_penalty_errors() {
        let p = TrajectoryProblem::<f64>::stationary(
            DVector::from_vec(vec![0.1; 4]),
            DMatrix::zeros(4, 4),
            4,
            0.0,
            0.0,
            0.0,
            4,
            3,
        )
        .unwrap();
        assert_eq!(p.num_binary_vars(), 32);
        assert!(matches!(build_qubo(&p, None), Err(Error::Capacity { .. })));
        let small = TrajectoryProblem::<f64>::stationary(
            DVector::from_vec(vec![0.1]),
            DMatrix::zeros(1, 1),
            1,
            0.0,
            0.0,
            0.0,
            1,
            1,
        )
        .unwrap();
        assert!(build_qubo(&small, Some(0.0)).is_err());
        assert!(build_qubo(&small, Some(-2.0)).is_err());
    }

    #[test]
    fn encoding_round_trip() {
        let enc = TrajectoryEncoding::new(2, 3, 5).unwrap();
        assert_eq!(enc.num_vars, 18);
        let traj = HoldingsTrajectory::new(vec![vec![5, 0, 3], vec![1, 4, 2]]);
        assert_eq!(enc.decode(&enc.encode(&traj).unwrap()), traj);
    }

    #[test]
    fn constant_prices_estimate_to_zero() {
        let prices = DMatrix::from_element(5, 2, 42.0);
        let est = estimate_inputs(&prices).unwrap();
        assert!(est.mean.iter().all(|&v| v == 0.0));
        assert!(est.covariance.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn doubling_asset_has_ln2_mean() {
        let prices = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 4.0, 8.0]);
        let est = estimate_inputs(&prices).unwrap();
        assert!((est.mean[0] - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(est.covariance[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn estimate_rejects_bad_data() {
        assert!(matches!(
            estimate_inputs(&DMatrix::from_element(2, 2, 1.0)),
            Err(Error::Data(_))
        ));
        let mut prices = DMatrix::from_element(4, 2, 1.0);
        prices[(2, 1)] = 0.0;
        let err = estimate_inputs(&prices).unwrap_err();
        assert!(err.to_string().contains("row 3 column 2"), "{err}");
    }
}
