//! Classical Monte Carlo (GBM paths, option prices, VaR/CVaR) and the
//! amplitude-estimation expectation estimator.

mod estimate;
mod gbm;
mod normal;
mod pricing;
mod qae;
mod risk;

pub use estimate::{chebyshev_samples, pairwise_sum, McEstimate, CHEBYSHEV_FACTOR};
pub use gbm::{gbm_step, gbm_step_euler, lognormal_step, normal_draw, simulate_path, terminal_prices, GbmParams};
pub use normal::inverse_normal_cdf;
pub use pricing::{price_asian_call, price_european_call};
pub use qae::{
    convergence_csv, convergence_study, log_log_slope, matched_error_resources, qae_expectation, Binning,
    ConvergenceRow, DiscretizedDistribution, ExpectationEstimator, LognormalCall, SpeedupReport,
    DISTRIBUTION_MAX_QUBITS,
};
pub use risk::{var_cvar, RiskReport};
