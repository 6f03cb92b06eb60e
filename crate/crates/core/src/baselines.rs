//! Comparison tests: the Bayesian-bootstrap DP test (the s = 0 limit of the
//! IDP machinery) and the "50/50 when indeterminate" composite.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::idp::{lower_prob, ApproxMode, Decision, Outcome, TestConfig};
use crate::sample::{Sample, TieMode};

/// The comparison set evaluated against the IDP test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    Mww,
    BbDp,
    FiftyFifty,
}

/// Bayesian-bootstrap DP test of P(X <= Y) > c: the single posterior
/// obtained at s = 0, where lower and upper collapse. Returns the Monte
/// Carlo posterior probability and the decision `prob > 1 - gamma`.
///
/// Runs the same code path as the IDP probabilities with s = 0, so the
/// estimate is bit-identical to `lower_prob` (and `upper_prob`) at the same
/// seed.
pub fn bb_test(
    x: &Sample,
    y: &Sample,
    gamma: f64,
    c: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<(f64, bool)> {
    let config = TestConfig {
        s: 0.0,
        gamma,
        c,
        mc_samples,
        seed,
        ties: TieMode::Midrank,
        approx: ApproxMode::MonteCarlo,
    };
    let (prob, _) = lower_prob(x, y, &config)?;
    Ok((prob, prob > 1.0 - gamma))
}

/// Comparison device: the IDP action when determinate, a fair coin
/// otherwise. The coin consumes one draw from `rng`.
pub fn fifty_fifty<R: Rng + ?Sized>(decision: &Decision, rng: &mut R) -> bool {
    match decision.outcome {
        Outcome::Greater => true,
        Outcome::NotGreater => false,
        Outcome::Indeterminate => rng.random::<bool>(),
    }
}
