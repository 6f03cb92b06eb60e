//! Rank-sum hypothesis testing of P(X <= Y) under an imprecise Dirichlet
//! process prior.
//!
//! Instead of committing to a base measure, the prior fixes only the
//! strength s and lets the normalized base measure range over all
//! probability measures. Posterior quantities then come in lower/upper
//! pairs, and the test returns a three-way outcome: `Greater`,
//! `NotGreater`, or `Indeterminate` when the decision would depend on the
//! prior. The crate provides
//!
//! - exact posterior mean/variance bounds and predictive bounds,
//! - Monte Carlo lower/upper posterior probabilities from Dirichlet weight
//!   draws (no stick-breaking), with a Gaussian large-sample mode,
//! - the frequentist MWW baseline (normal approximation and exact
//!   permutation), the Bayesian-bootstrap DP test, and the
//!   "50/50 when indeterminate" composite,
//! - a seeded, shard-invariant simulation harness with CSV/JSON reports.

pub mod baselines;
pub mod dirichlet;
pub mod error;
pub mod idp;
pub mod sample;
pub mod seeds;
pub mod simulation;
pub mod stats;

pub use baselines::{bb_test, fifty_fifty, BaselineKind};
pub use dirichlet::{sample_weights, weight_moments, PosteriorWeights, WeightMoments, WeightVector};
pub use error::{Error, Result};
pub use idp::{
    choose_s, idp_decide, interval_width, lower_prob, moments_lower, moments_upper,
    normal_approx_prob, posterior_mean_bounds, posterior_samples, predictive_bounds, upper_prob,
    ApproxMode, Decision, GFunction, Outcome, PosteriorBounds, TestConfig, DEFAULT_PRIOR_STRENGTH,
};
pub use sample::{Sample, TieMode};
pub use simulation::{
    emit_tables, loss_eval, run_experiment, run_experiment_sharded, true_hypothesis, CellResult,
    ExperimentResult, ExperimentSpec, Generator, OutcomeCounts, ReportFormat, TestKind,
};
pub use stats::{heaviside, mww_test, u_statistic, win_matrix, MwwMethod, WinMatrix};
