//! Quantum-inspired optimisation and Monte Carlo toolkit for finance.
//!
//! Models are generic over the scalar type: `f64`/`f32` for numerical work and
//! exact rationals (`Ratio<i64>`, `Ratio<i128>`) where bit-exact arithmetic is
//! needed. The aliases below fix the common choices.

pub mod arbitrage;
pub mod error;
pub mod features;
pub mod monte_carlo;
pub mod portfolio;
pub mod quantum;
pub mod qubo;
pub mod rng;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use qubo::{BinaryQuadraticModel, Bitstring, IntegerEncoding, IsingModel};
pub use scalar::{Real, Scalar};

pub type Rational = num_rational::Ratio<i128>;

pub type Bqm = BinaryQuadraticModel<f64>;
pub type RationalBqm = BinaryQuadraticModel<Rational>;
pub type Ising = IsingModel<f64>;
pub type SolveResult = solvers::SolveResult<f64>;

pub type TrajectoryProblem = portfolio::TrajectoryProblem<f64>;
pub type RationalTrajectoryProblem = portfolio::TrajectoryProblem<Rational>;
pub type CurrencyGraph = arbitrage::CurrencyGraph<f64>;
pub type ArbitrageSolution = arbitrage::ArbitrageSolution<f64>;
pub type CreditDataset = features::CreditDataset<f64>;
pub type FeatureSelection = features::FeatureSelection<f64>;

pub type StateVector = quantum::StateVector<f64>;
pub type QaeResult = quantum::QaeResult<f64>;

pub type GbmParams = monte_carlo::GbmParams<f64>;
pub type McEstimate = monte_carlo::McEstimate<f64>;
pub type RiskReport = monte_carlo::RiskReport<f64>;
pub type DiscretizedDistribution = monte_carlo::DiscretizedDistribution<f64>;
