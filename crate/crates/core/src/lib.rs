//! Markov-switching smooth-transition GARCH.
//!
//! Each of `K` regimes carries a GARCH(1,1)-type variance whose ARCH
//! coefficient blends `a1` and `a2` through a logistic function of the
//! previous return; a hidden Markov chain picks the active regime.
//!
//! - [`model`]: parameters, transition matrices, simulation
//! - [`filter`]: regime filtering, likelihood, predictive mixtures
//! - [`stability`]: sufficient second-order stationarity check
//! - [`inference`]: Gibbs sampler with griddy-Gibbs parameter updates
//! - [`evaluation`]: DIC, rolling forecasts, VaR backtests, Diebold-Mariano

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod filter;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod stability;
pub mod util;

pub use error::{Error, Result};
pub use filter::{
    conditional_variance, filter_step, log_likelihood, predictive_quantile, run_filter, FilterRun, FilterState,
    PredictiveDistribution,
};
pub use inference::{
    fit, griddy_gibbs_draw, posterior_summary, run_gibbs, McmcConfig, PosteriorDraws, PosteriorSummary, PriorSpec,
};
pub use model::{simulate, ModelSpec, RegimeParams, ReturnSeries, Simulation, TransitionMatrix, Variant};
pub use stability::{build_c, stability_report, threshold_m, StabilityReport, DEFAULT_DELTA};
pub use util::{seeded_rng, SeededRng};
