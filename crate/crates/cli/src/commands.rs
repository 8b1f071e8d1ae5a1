//! One function per subcommand: read inputs, call the core, shape the results.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use qfin_core::arbitrage::{build_arbitrage_qubo, decode_cycles, enumerate_best_cycle, CYCLE_ENUMERATION_MAX_VERTICES};
use qfin_core::features::{correlations, CorrelationKind, FeatureSelectionProblem};
use qfin_core::monte_carlo::{
    convergence_csv, convergence_study, log_log_slope, matched_error_resources, price_asian_call, price_european_call,
    terminal_prices, var_cvar, Binning, ExpectationEstimator, LognormalCall,
};
use qfin_core::portfolio::{build_qubo, estimate_inputs, trajectory_return};
use qfin_core::rng::derive_seed;
use qfin_core::solvers::{solve, AdiabaticConfig, AnnealSchedule, SolverChoice};
use qfin_core::{Bqm, CreditDataset, CurrencyGraph, GbmParams, McEstimate, SolveResult, TrajectoryProblem};

use crate::cli::*;
use crate::error::{CliError, CliResult};
use crate::ingest::{numeric_table, rate_table};

/// Lowest-energy samples listed in a report.
const REPORTED_SAMPLES: usize = 10;

/// Classical sample grid and ancilla grid for the convergence study.
const CONVERGENCE_SAMPLES: [usize; 5] = [16, 64, 256, 1024, 4096];
const CONVERGENCE_ANCILLAS: std::ops::RangeInclusive<usize> = 2..=10;

/// Largest Chebyshev sample count for which a matched classical run is drawn.
const MATCHED_CLASSICAL_LIMIT: u64 = 10_000_000;

pub struct Outcome {
    pub results: Value,
    /// Extra files to write alongside the report.
    pub side_files: Vec<(PathBuf, String)>,
}

impl From<Value> for Outcome {
    fn from(results: Value) -> Self {
        Self {
            results,
            side_files: Vec::new(),
        }
    }
}

pub fn run_command(command: &Command) -> CliResult<Outcome> {
    match command {
        Command::Portfolio(a) => portfolio(a).map(Outcome::from),
        Command::Arbitrage(a) => arbitrage(a).map(Outcome::from),
        Command::Features(a) => features(a).map(Outcome::from),
        Command::Price(a) => price(a).map(Outcome::from),
        Command::Var(a) => var(a).map(Outcome::from),
        Command::QaeDemo(a) => qae_demo(a),
        Command::Anneal(a) => anneal(a).map(Outcome::from),
    }
}

fn solver_choice(args: &SolverArgs, seed: u64) -> SolverChoice {
    match args.solver {
        SolverKind::Brute => SolverChoice::BruteForce,
        SolverKind::Sa => {
            SolverChoice::SimulatedAnnealing(AnnealSchedule::new(args.sweeps, args.restarts, derive_seed(seed, "anneal")))
        }
        SolverKind::Adiabatic => {
            let mut c = AdiabaticConfig::new(args.anneal_time, args.anneal_steps);
            c.shots = args.shots;
            c.seed = derive_seed(seed, "adiabatic");
            SolverChoice::Adiabatic(c)
        }
    }
}

fn solve_json(choice: &SolverChoice, r: &SolveResult) -> Value {
    let mut samples = r.samples.clone();
    samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.bits.cmp(&b.bits)));
    let listed: Vec<Value> = samples
        .iter()
        .take(REPORTED_SAMPLES)
        .map(|s| json!({"bits": s.bits.to_string(), "energy": s.energy, "multiplicity": s.multiplicity}))
        .collect();
    json!({
        "solver": choice.name(),
        "best": r.best.to_string(),
        "best_energy": r.best_energy,
        "ground_state_probability": r.ground_state_probability,
        "distinct_samples": r.samples.len(),
        "total_shots": r.total_shots(),
        "lowest_samples": listed,
    })
}

fn estimate_json(e: &McEstimate) -> Value {
    json!({
        "mean": e.mean,
        "std_dev": e.std_dev,
        "std_error": e.std_error,
        "samples": e.samples,
        "epsilon": e.epsilon,
        "confidence": e.confidence,
        "method": e.method,
    })
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn portfolio(a: &PortfolioArgs) -> CliResult<Value> {
    let table = numeric_table(&a.prices)?;
    let n = table.columns.len();
    let prices = DMatrix::from_fn(table.rows.len(), n, |r, c| table.rows[r][c]);
    let est = estimate_inputs(&prices)
        .map_err(|e| CliError::Data(format!("{}: {e}", path_str(&a.prices))))?;
    let problem = TrajectoryProblem::stationary(
        est.mean.clone(),
        est.covariance.clone(),
        a.periods,
        a.gamma,
        a.trade_cost,
        a.impact_cost,
        a.total,
        a.max_per_asset.unwrap_or(a.total),
    )?;
    let (model, encoding) = build_qubo(&problem, a.penalty)?;
    let choice = solver_choice(&a.solver, a.common.seed);
    let result = solve(&model, &choice)?;
    let traj = encoding.decode(&result.best);
    let feasible = traj.is_feasible(&problem);
    let ret = if feasible { Some(trajectory_return(&problem, &traj)?) } else { None };
    let named = |v: &[f64]| -> Map<String, Value> {
        table.columns.iter().cloned().zip(v.iter().map(|&x| Value::from(x))).collect()
    };
    let trajectory: Vec<Value> = traj
        .holdings
        .iter()
        .enumerate()
        .map(|(t, h)| {
            let holdings: Map<String, Value> = table.columns.iter().cloned().zip(h.iter().map(|&u| Value::from(u))).collect();
            json!({"period": t + 1, "holdings": holdings})
        })
        .collect();
    let covariance: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| est.covariance[(i, j)]).collect()).collect();
    Ok(json!({
        "input": {"path": path_str(&a.prices), "rows": table.rows.len(), "columns": n, "assets": table.columns},
        "estimate": {"mean_log_return": named(est.mean.as_slice()), "covariance": covariance},
        "qubo": {
            "num_vars": model.num_vars(),
            "num_interactions": model.num_interactions(),
            "bits_per_holding": problem.bits_per_holding(),
        },
        "solve": solve_json(&choice, &result),
        "trajectory": trajectory,
        "feasible": feasible,
        "return": ret,
    }))
}

fn arbitrage(a: &ArbitrageArgs) -> CliResult<Value> {
    let quotes = rate_table(&a.rates)?;
    let graph = CurrencyGraph::from_quotes(quotes.iter().map(|(f, t, r)| (f.as_str(), t.as_str(), *r)))
        .map_err(|e| CliError::Data(format!("{}: {e}", path_str(&a.rates))))?;
    let q = build_arbitrage_qubo(&graph, a.flow_penalty, a.exit_penalty)?;
    let choice = solver_choice(&a.solver, a.common.seed);
    let result = solve(&q.model, &choice)?;
    let sol = decode_cycles(&graph, &q.edges, &result.best)?;
    let names = |vs: &[usize]| -> Vec<String> { vs.iter().map(|&v| graph.assets()[v].clone()).collect() };
    let cycles: Vec<Value> = sol
        .cycles
        .iter()
        .map(|c| json!({"assets": names(&c.vertices), "log_profit": c.log_profit, "profit_factor": c.profit_factor()}))
        .collect();
    let edges_used: Vec<[String; 2]> = sol
        .edges_used
        .iter()
        .map(|&(i, j)| [graph.assets()[i].clone(), graph.assets()[j].clone()])
        .collect();
    let enumeration = if graph.num_assets() <= CYCLE_ENUMERATION_MAX_VERTICES {
        let best = enumerate_best_cycle(&graph)?;
        json!({"cycle": names(&best.best_cycle), "log_profit": best.best_log_profit})
    } else {
        Value::Null
    };
    Ok(json!({
        "input": {"path": path_str(&a.rates), "quotes": quotes.len(), "assets": graph.assets()},
        "qubo": {
            "num_vars": q.model.num_vars(),
            "flow_penalty": q.flow_penalty,
            "exit_penalty": q.exit_penalty,
        },
        "solve": solve_json(&choice, &result),
        "feasible": sol.feasible,
        "cycle": names(&sol.best_cycle),
        "log_profit": sol.best_log_profit,
        "profit_factor": sol.profit_factor(),
        "total_log_profit": sol.total_log_profit,
        "cycles": cycles,
        "edges_used": edges_used,
        "enumeration": enumeration,
    }))
}

fn features(a: &FeaturesArgs) -> CliResult<Value> {
    let table = numeric_table(&a.data)?;
    let target = table
        .columns
        .iter()
        .position(|c| *c == a.outcome)
        .ok_or_else(|| CliError::Data(format!("{}: line 1: no column named '{}'", path_str(&a.data), a.outcome)))?;
    let names: Vec<String> = table.columns.iter().filter(|c| **c != a.outcome).cloned().collect();
    let cols: Vec<usize> = (0..table.columns.len()).filter(|&c| c != target).collect();
    let m = table.rows.len();
    let x = DMatrix::from_fn(m, cols.len(), |r, k| table.rows[r][cols[k]]);
    let y = DVector::from_fn(m, |r, _| table.rows[r][target]);
    let with_path = |e: qfin_core::Error| match e {
        qfin_core::Error::Data(msg) => CliError::Data(format!("{}: {msg} (columns named on line 1)", path_str(&a.data))),
        other => other.into(),
    };
    let data = CreditDataset::new(names.clone(), x, y).map_err(with_path)?;
    let kind = match a.correlation {
        CorrelationArg::Pearson => CorrelationKind::Pearson,
        CorrelationArg::Spearman => CorrelationKind::Spearman,
    };
    let (rho_v, rho) = correlations(&data, kind).map_err(with_path)?;
    let problem = FeatureSelectionProblem::new(rho_v.clone(), rho.clone(), a.alpha)?;
    let model = qfin_core::features::build_feature_qubo(&problem)?;
    let choice = solver_choice(&a.solver, a.common.seed);
    let result = solve(&model, &choice)?;
    let mut selected: Vec<usize> = (0..names.len()).filter(|&j| result.best.get(j) == 1).collect();
    selected.sort_by(|&p, &q| rho_v[q].total_cmp(&rho_v[p]).then(p.cmp(&q)));
    let selected: Vec<Value> = selected
        .iter()
        .map(|&j| json!({"name": names[j], "outcome_correlation": rho_v[j]}))
        .collect();
    let outcome_corr: Map<String, Value> = names.iter().cloned().zip(rho_v.iter().map(|&v| Value::from(v))).collect();
    let matrix: Vec<Vec<f64>> = (0..names.len()).map(|i| (0..names.len()).map(|j| rho[(i, j)]).collect()).collect();
    Ok(json!({
        "input": {"path": path_str(&a.data), "rows": m, "columns": table.columns.len(), "features": names},
        "correlation": {"outcome": outcome_corr, "features": matrix},
        "solve": solve_json(&choice, &result),
        "selected": selected,
        "energy": result.best_energy,
    }))
}

fn price(a: &PriceArgs) -> CliResult<Value> {
    if a.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let gbm = GbmParams {
        initial_price: a.s0,
        drift: a.drift,
        volatility: a.vol,
        dt: a.maturity / a.steps as f64,
        steps: a.steps,
        seed: derive_seed(a.common.seed, "price"),
    };
    let est = match a.option {
        OptionKind::European => price_european_call(&gbm, a.strike, a.maturity, a.samples)?,
        OptionKind::Asian => {
            let dates: Vec<f64> = (1..=a.steps).map(|i| a.maturity * i as f64 / a.steps as f64).collect();
            price_asian_call(&gbm, a.strike, a.maturity, &dates, a.samples)?
        }
    };
    Ok(json!({"estimate": estimate_json(&est)}))
}

fn var(a: &VarArgs) -> CliResult<Value> {
    let (losses, source) = match &a.losses {
        Some(path) => {
            let t = numeric_table(path)?;
            if t.columns.len() != 1 {
                return Err(CliError::Data(format!(
                    "{}: line 1: expected one loss column, found {}",
                    path_str(path),
                    t.columns.len()
                )));
            }
            (t.rows.into_iter().map(|r| r[0]).collect::<Vec<f64>>(), path_str(path))
        }
        None => {
            let gbm = GbmParams {
                initial_price: a.s0,
                drift: a.drift,
                volatility: a.vol,
                dt: a.dt,
                steps: a.steps,
                seed: derive_seed(a.common.seed, "var"),
            };
            let finals = terminal_prices(&gbm, a.samples)?;
            (finals.iter().map(|s| a.position * (a.s0 - s)).collect(), "simulated gbm".to_string())
        }
    };
    let r = var_cvar(&losses, a.alpha)?;
    Ok(json!({
        "source": source,
        "confidence": r.confidence,
        "var": r.var,
        "cvar": r.cvar,
        "samples": r.samples,
    }))
}

fn convergence_path(a: &QaeDemoArgs) -> Option<PathBuf> {
    a.convergence_csv
        .clone()
        .or_else(|| a.common.output.as_ref().map(|o| o.with_extension("convergence.csv")))
}

fn qae_demo(a: &QaeDemoArgs) -> CliResult<Outcome> {
    let call = LognormalCall {
        initial_price: a.s0,
        rate: a.drift,
        volatility: a.vol,
        maturity: a.maturity,
        strike: a.strike,
        qubits: a.qubits,
        binning: match a.binning {
            BinningArg::EqualWidth => Binning::EqualWidth,
            BinningArg::EqualProbability => Binning::EqualProbability,
        },
    };
    let dist = call.discretize::<f64>()?;
    let seed = a.common.seed;
    let qae = ExpectationEstimator::new(&dist, a.ancillas)?.estimate(derive_seed(seed, "qae"));
    let speedup = matched_error_resources(&dist, a.epsilon)?;
    let matched_classical = (speedup.classical_samples <= MATCHED_CLASSICAL_LIMIT).then(|| {
        let k = speedup.classical_samples as usize;
        dist.to_payoff(dist.sample_mean(k, derive_seed(seed, "matched-classical"), 0))
    });
    let ancillas: Vec<usize> = CONVERGENCE_ANCILLAS.collect();
    let rows = convergence_study(&dist, &CONVERGENCE_SAMPLES, &ancillas, a.repetitions, derive_seed(seed, "convergence"))?;
    let (lo, hi) = dist.bounds();
    let results = json!({
        "distribution": {
            "values": dist.values(),
            "probabilities": dist.probabilities(),
            "payoff_range": [lo, hi],
            "payoff_mean": dist.payoff_mean(),
            "rescaled_mean": dist.mean(),
            "rescaled_variance": dist.variance(),
        },
        "qae": estimate_json(&qae),
        "matched_error": {
            "epsilon": speedup.epsilon,
            "classical_samples": speedup.classical_samples,
            "ancillas": speedup.ancillas,
            "qae_evaluations": speedup.qae_evaluations,
            "ratio": speedup.ratio,
            "classical_estimate": matched_classical,
        },
        "convergence": {
            "rows": rows.iter().map(|r| json!({"resource": r.resource, "error": r.error, "kind": r.kind})).collect::<Vec<_>>(),
            "classical_slope": log_log_slope(&rows, "classical"),
            "qae_slope": log_log_slope(&rows, "qae"),
        },
    });
    let side_files = convergence_path(a)
        .map(|p| vec![(p, convergence_csv(&rows))])
        .unwrap_or_default();
    Ok(Outcome { results, side_files })
}

fn anneal(a: &AnnealArgs) -> CliResult<Value> {
    let text = std::fs::read_to_string(&a.qubo)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path_str(&a.qubo))))?;
    let model = Bqm::from_text(&text).map_err(|e| CliError::Data(format!("{}: {e}", path_str(&a.qubo))))?;
    let choice = solver_choice(&a.solver, a.common.seed);
    let result = solve(&model, &choice)?;
    Ok(json!({
        "input": {"path": path_str(&a.qubo), "num_vars": model.num_vars(), "num_interactions": model.num_interactions()},
        "solve": solve_json(&choice, &result),
    }))
}
