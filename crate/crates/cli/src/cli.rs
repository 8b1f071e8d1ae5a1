//! Command-line surface. Every long flag doubles as a config-file key.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "qfin", version, about = "QUBO finance models, annealers and amplitude-estimation Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multi-period trading trajectory from a price history.
    Portfolio(PortfolioArgs),
    /// Most profitable currency cycle from a rate table.
    Arbitrage(ArbitrageArgs),
    /// Credit feature subset balancing relevance against redundancy.
    Features(FeaturesArgs),
    /// Monte Carlo option price.
    Price(PriceArgs),
    /// Value at risk and conditional value at risk.
    Var(VarArgs),
    /// Amplitude estimation of an option payoff against classical sampling.
    QaeDemo(QaeDemoArgs),
    /// Minimise a model given in the line-oriented QUBO text format.
    Anneal(AnnealArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Portfolio(_) => "portfolio",
            Self::Arbitrage(_) => "arbitrage",
            Self::Features(_) => "features",
            Self::Price(_) => "price",
            Self::Var(_) => "var",
            Self::QaeDemo(_) => "qae-demo",
            Self::Anneal(_) => "anneal",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Self::Portfolio(a) => &a.common,
            Self::Arbitrage(a) => &a.common,
            Self::Features(a) => &a.common,
            Self::Price(a) => &a.common,
            Self::Var(a) => &a.common,
            Self::QaeDemo(a) => &a.common,
            Self::Anneal(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CommonArgs {
    /// Key = value file; flags given on the command line win.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Top-level seed; every random stream derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub output: Option<PathBuf>,

    /// Add wall-clock time to the report (breaks byte-identical reruns).
    #[arg(long)]
    #[serde(skip)]
    pub record_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Brute,
    Sa,
    Adiabatic,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Brute)]
    pub solver: SolverKind,
    /// Annealing sweeps per restart.
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    /// Total adiabatic evolution time.
    #[arg(long, default_value_t = 20.0)]
    pub anneal_time: f64,
    /// RK4 steps for the adiabatic evolution.
    #[arg(long, default_value_t = 4000)]
    pub anneal_steps: usize,
    /// Measurements drawn from the final adiabatic state.
    #[arg(long, default_value_t = 1000)]
    pub shots: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PortfolioArgs {
    /// CSV: header of asset names, one row of prices per timestamp.
    #[arg(long, value_name = "PATH")]
    pub prices: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub periods: usize,
    /// Risk aversion.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Units held in every period.
    #[arg(long, default_value_t = 4)]
    pub total: u64,
    /// Cap on units per asset; defaults to --total.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_per_asset: Option<u64>,
    /// Quadratic trading cost (multiple of the identity).
    #[arg(long, default_value_t = 0.0)]
    pub trade_cost: f64,
    /// Market impact (multiple of the identity).
    #[arg(long, default_value_t = 0.0)]
    pub impact_cost: f64,
    /// Budget penalty strength; defaults to a bound that dominates the objective.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ArbitrageArgs {
    /// CSV rows `from,to,rate` (header optional).
    #[arg(long, value_name = "PATH")]
    pub rates: PathBuf,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow_penalty: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_penalty: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationArg {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FeaturesArgs {
    /// CSV with a header of column names, one applicant per row.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// Column holding past credit decisions.
    #[arg(long)]
    pub outcome: String,
    /// Weight on relevance versus redundancy, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = CorrelationArg::Pearson)]
    pub correlation: CorrelationArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptionKind {
    European,
    Asian,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PriceArgs {
    #[arg(long, default_value_t = 100.0)]
    pub s0: f64,
    /// Risk-free rate, used as the drift.
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    #[arg(long, default_value_t = 0.2)]
    pub vol: f64,
    #[arg(long, default_value_t = 100.0)]
    pub strike: f64,
    #[arg(long, default_value_t = 1.0)]
    pub maturity: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long = "option", value_enum, default_value_t = OptionKind::European)]
    pub option: OptionKind,
    /// Evenly spaced monitoring dates for the Asian option.
    #[arg(long, default_value_t = 12)]
    pub steps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct VarArgs {
    /// Single-column CSV of losses (header `loss`); simulated from GBM when absent.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub losses: Option<PathBuf>,
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100.0)]
    pub s0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    #[arg(long, default_value_t = 0.2)]
    pub vol: f64,
    #[arg(long, default_value_t = 1.0 / 252.0)]
    pub dt: f64,
    /// Steps in the loss horizon.
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Units held; loss is position·(S0 − S_T).
    #[arg(long, default_value_t = 1.0)]
    pub position: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinningArg {
    EqualWidth,
    EqualProbability,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct QaeDemoArgs {
    #[arg(long, default_value_t = 100.0)]
    pub s0: f64,
    /// Risk-free rate.
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    #[arg(long, default_value_t = 0.2)]
    pub vol: f64,
    #[arg(long, default_value_t = 100.0)]
    pub strike: f64,
    #[arg(long, default_value_t = 1.0)]
    pub maturity: f64,
    /// Qubits for the payoff distribution (2^n points).
    #[arg(long, default_value_t = 3)]
    pub qubits: usize,
    #[arg(long, value_enum, default_value_t = BinningArg::EqualWidth)]
    pub binning: BinningArg,
    /// Phase-estimation qubits m; M = 2^m evaluations.
    #[arg(long, default_value_t = 7)]
    pub ancillas: usize,
    /// Target error for the matched-resource comparison, in rescaled units.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Seeded runs per grid point in the convergence study.
    #[arg(long, default_value_t = 400)]
    pub repetitions: usize,
    /// Where to write the convergence CSV; defaults to next to --output.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub convergence_csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AnnealArgs {
    /// Model file: `offset v`, `lin i v` and `quad i j v` lines.
    #[arg(long, value_name = "PATH")]
    pub qubo: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}
