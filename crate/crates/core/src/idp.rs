//! The imprecise-Dirichlet-process test for P(X <= Y).
//!
//! Fixing the prior strength s and letting the normalized base measure range
//! over all probability measures yields lower and upper posterior quantities
//! instead of a single posterior. The extreme posteriors admit a sampled
//! representation over the observed atoms plus one prior atom, so every
//! Monte Carlo quantity here reduces to draws of two Dirichlet weight
//! vectors; means and variances also have closed forms.
//!
//! Reproducibility contract: Monte Carlo draw t consumes an independent RNG
//! stream t keyed by the config seed, sampling the x-side weight vector and
//! then the y-side one. Estimates are therefore deterministic functions of
//! (inputs, seed) no matter how draws are sharded across tasks.

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{PosteriorWeights, WeightVector};
use crate::error::{Error, Result};
use crate::sample::{Sample, TieMode};
use crate::seeds::{rng_from_seed, rng_stream};
use crate::stats::{std_normal_cdf, win_stats, PairTally};

/// Prior strength at which the posterior interval retains half its prior
/// width after a single observation pair.
pub const DEFAULT_PRIOR_STRENGTH: f64 = std::f64::consts::SQRT_2 - 1.0;

/// How posterior probabilities of the hypothesis are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ApproxMode {
    /// Monte Carlo over weight draws. The default; valid at any sample size.
    #[default]
    MonteCarlo,
    /// Gaussian approximation from the closed-form moments. Asymptotic;
    /// intended for large samples (n1, n2 >= 30 as a soft guideline).
    Normal,
}

/// Parameters of one IDP test evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    /// Prior strength s >= 0. Zero collapses to the Bayesian bootstrap.
    pub s: f64,
    /// Loss ratio K0/(K0+K1); "greater" requires posterior probability
    /// above 1 - gamma.
    pub gamma: f64,
    /// Hypothesis threshold: the event tested is P(X <= Y) > c.
    pub c: f64,
    /// Monte Carlo draws per posterior probability estimate.
    pub mc_samples: usize,
    pub seed: u64,
    pub ties: TieMode,
    pub approx: ApproxMode,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            s: DEFAULT_PRIOR_STRENGTH,
            gamma: 0.05,
            c: 0.5,
            mc_samples: 20_000,
            seed: 0,
            ties: TieMode::Midrank,
            approx: ApproxMode::MonteCarlo,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s.is_finite() && self.s >= 0.0) {
            return Err(Error::param("s", format!("must be finite and >= 0, got {}", self.s)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::param(
                "gamma",
                format!("must lie in (0, 1), got {}", self.gamma),
            ));
        }
        if !(self.c.is_finite() && (0.0..=1.0).contains(&self.c)) {
            return Err(Error::param("c", format!("must lie in [0, 1], got {}", self.c)));
        }
        if self.mc_samples < 100 {
            return Err(Error::param(
                "mc_samples",
                format!("must be at least 100, got {}", self.mc_samples),
            ));
        }
        Ok(())
    }
}

/// Lower and upper posterior summaries of P(X <= Y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorBounds {
    pub lower_mean: f64,
    pub upper_mean: f64,
    pub lower_var: f64,
    pub upper_var: f64,
    /// Lower/upper posterior probability of the event P(X <= Y) > c.
    pub lower_prob: f64,
    pub upper_prob: f64,
    /// Binomial standard errors of the probability estimates; zero under
    /// the Normal approximation.
    pub lower_prob_se: f64,
    pub upper_prob_se: f64,
}

/// The three-way test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Both posterior probability bounds exceed 1 - gamma (a = 1).
    Greater,
    /// Neither bound exceeds 1 - gamma (a = 0).
    NotGreater,
    /// The bounds straddle 1 - gamma: the decision is prior-dependent.
    Indeterminate,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Greater => "greater",
            Outcome::NotGreater => "not-greater",
            Outcome::Indeterminate => "indeterminate",
        })
    }
}

/// Full result of one IDP test: the trichotomy plus the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub outcome: Outcome,
    pub bounds: PosteriorBounds,
    pub config: TestConfig,
}

/// Prior strength whose posterior interval width after one observation pair
/// equals `rho`: the unique positive root of (s^2 + 2s)/(s+1)^2 = rho.
pub fn choose_s(rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", format!("must lie in (0, 1), got {rho}")));
    }
    Ok((1.0 - rho).sqrt().recip() - 1.0)
}

/// Posterior expectation bounds for a bounded function f with range
/// [f_inf, f_sup], given its values at the observations.
///
/// With no observations the prior state is vacuous and the full range is
/// returned. Otherwise the bounds are (s*f_inf + sum f)/(s + n) and
/// (s*f_sup + sum f)/(s + n).
pub fn predictive_bounds(
    f_values: &[f64],
    s: f64,
    f_inf: f64,
    f_sup: f64,
) -> Result<(f64, f64)> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
    }
    if !f_inf.is_finite() || !f_sup.is_finite() || f_inf > f_sup {
        return Err(Error::param(
            "f_inf/f_sup",
            format!("need finite f_inf <= f_sup, got {f_inf} and {f_sup}"),
        ));
    }
    for (index, &v) in f_values.iter().enumerate() {
        if !v.is_finite() || v < f_inf || v > f_sup {
            return Err(Error::param(
                "f_values",
                format!("value {v} at index {index} outside [{f_inf}, {f_sup}]"),
            ));
        }
    }
    let n = f_values.len() as f64;
    if f_values.is_empty() {
        return Ok((f_inf, f_sup));
    }
    let sum: f64 = f_values.iter().sum();
    Ok(((s * f_inf + sum) / (s + n), (s * f_sup + sum) / (s + n)))
}

fn validate_strength(s: f64) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
    }
    Ok(())
}

/// Exact lower and upper posterior means of P(X <= Y):
/// U/((s+n1)(s+n2)) and the same plus s(s+n1+n2)/((s+n1)(s+n2)).
pub fn posterior_mean_bounds(
    x: &Sample,
    y: &Sample,
    s: f64,
    ties: TieMode,
) -> Result<(f64, f64)> {
    validate_strength(s)?;
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let u = crate::stats::u_statistic(x, y, ties);
    let denom = (s + n1) * (s + n2);
    let lower = u / denom;
    let upper = lower + interval_width(s, n1, n2);
    Ok((lower, upper))
}

/// The exact posterior interval width s(s+n1+n2)/((s+n1)(s+n2)).
pub fn interval_width(s: f64, n1: f64, n2: f64) -> f64 {
    s * (s + n1 + n2) / ((s + n1) * (s + n2))
}

fn clamp_variance(v: f64) -> f64 {
    // Floating cancellation in trace - mu^2 can leave a tiny negative.
    debug_assert!(v > -1e-9, "variance fell below the cancellation floor: {v}");
    v.max(0.0)
}

/// Mean and variance of the lower posterior distribution of P(X <= Y).
///
/// With W, V the observation-weight vectors and A the win matrix, the lower
/// posterior variable is g = W'AV, whose moments are mu = E[W]'A E[V] and
/// sigma^2 = tr(A' E[WW'] A E[VV']) - mu^2. The Dirichlet moment structure
/// E[WW'] = (I + J)/((s+n)(s+n+1)) reduces the trace to the win-matrix
/// summaries: sum of squared entries, squared row sums, squared column sums
/// and U^2.
pub fn moments_lower(x: &Sample, y: &Sample, s: f64, ties: TieMode) -> Result<(f64, f64)> {
    validate_strength(s)?;
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let w = win_stats(x, y, ties);
    let c1 = ((s + n1) * (s + n1 + 1.0)).recip();
    let c2 = ((s + n2) * (s + n2 + 1.0)).recip();
    let mu = w.u / ((s + n1) * (s + n2));
    let trace = w.sum_sq + w.row_sq + w.col_sq + w.u * w.u;
    Ok((mu, clamp_variance(c1 * c2 * trace - mu * mu)))
}

/// Mean and variance of the upper posterior distribution of P(X <= Y).
///
/// The upper variable augments g with the prior-atom weights:
/// g = w10 w20 + w10 sum(V) + w20 sum(W) + W'AV, equivalently the bilinear
/// form of the augmented weight vectors with A bordered by a row and column
/// of ones. Expanding the bordered trace in block form leaves the same
/// win-matrix summaries plus polynomial terms in s, n1, n2 and U.
pub fn moments_upper(x: &Sample, y: &Sample, s: f64, ties: TieMode) -> Result<(f64, f64)> {
    validate_strength(s)?;
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let w = win_stats(x, y, ties);
    let c1 = ((s + n1) * (s + n1 + 1.0)).recip();
    let c2 = ((s + n2) * (s + n2 + 1.0)).recip();
    let mu = (w.u + s * (s + n1 + n2)) / ((s + n1) * (s + n2));
    let trace = s * (s + 1.0) * (s + n1) * (s + n1 + 1.0)
        + 2.0 * s * (s + n1 + 1.0) * (s * n2 + w.u)
        + s * (s + 1.0) * n2 * (n2 + 1.0)
        + 2.0 * s * w.u * (n2 + 1.0)
        + w.sum_sq
        + w.row_sq
        + w.col_sq
        + w.u * w.u;
    Ok((mu, clamp_variance(c1 * c2 * trace - mu * mu)))
}

/// The posterior random variable g evaluated on explicit weight draws.
///
/// `lower` is the bilinear form W'AV over observation weights; `upper` adds
/// the prior-atom terms w10 w20 + w10 sum(V) + w20 sum(W). Evaluation uses
/// weighted tail sums over the sorted y values, so a draw costs
/// O(n1 + n2) after construction.
pub struct GFunction {
    tally: PairTally,
}

impl GFunction {
    pub fn new(x: &Sample, y: &Sample, ties: TieMode) -> Self {
        GFunction {
            tally: PairTally::new(x, y, ties),
        }
    }

    fn lower_with(&self, w1: &WeightVector, w2: &WeightVector, prefix: &mut Vec<f64>) -> f64 {
        let t = &self.tally;
        assert_eq!(w1.len(), t.n1, "x-side weight dimension mismatch");
        assert_eq!(w2.len(), t.n2, "y-side weight dimension mismatch");
        prefix.clear();
        prefix.push(0.0);
        let w2_obs = w2.observation_weights();
        let mut acc = 0.0;
        for &idx in &t.y_order {
            acc += w2_obs[idx as usize];
            prefix.push(acc);
        }
        let total = acc;
        let w1_obs = w1.observation_weights();
        let mut g = 0.0;
        for j in 0..t.n1 {
            let below = t.y_below_x[j] as usize;
            let at_or_below = below + t.y_tied_x[j] as usize;
            let above = total - prefix[at_or_below];
            let tail = match t.ties {
                TieMode::Strict => above,
                TieMode::Midrank => above + 0.5 * (prefix[at_or_below] - prefix[below]),
            };
            g += w1_obs[j] * tail;
        }
        g
    }

    pub fn lower(&self, w1: &WeightVector, w2: &WeightVector) -> f64 {
        let mut prefix = Vec::with_capacity(self.tally.n2 + 1);
        self.lower_with(w1, w2, &mut prefix)
    }

    pub fn upper(&self, w1: &WeightVector, w2: &WeightVector) -> f64 {
        Self::augment(self.lower(w1, w2), w1, w2)
    }

    fn augment(g_lower: f64, w1: &WeightVector, w2: &WeightVector) -> f64 {
        let (p1, p2) = (w1.prior_weight(), w2.prior_weight());
        g_lower + p1 * p2 + p1 * w2.observation_sum() + p2 * w1.observation_sum()
    }
}

/// Runs the coupled Monte Carlo loop, invoking `visit` with each
/// (g_lower, g_upper) pair. Both values share one weight draw.
fn mc_posterior<F: FnMut(f64, f64)>(
    x: &Sample,
    y: &Sample,
    config: &TestConfig,
    mut visit: F,
) -> Result<()> {
    config.validate()?;
    let gf = GFunction::new(x, y, config.ties);
    let sampler_x = PosteriorWeights::new(config.s, x.len())?;
    let sampler_y = PosteriorWeights::new(config.s, y.len())?;
    let template = rng_from_seed(config.seed);
    let mut prefix = Vec::with_capacity(y.len() + 1);
    for t in 0..config.mc_samples {
        let mut rng = rng_stream(&template, t as u64);
        let w1 = sampler_x.sample(&mut rng);
        let w2 = sampler_y.sample(&mut rng);
        let g_low = gf.lower_with(&w1, &w2, &mut prefix);
        let g_up = GFunction::augment(g_low, &w1, &w2);
        visit(g_low, g_up);
    }
    Ok(())
}

fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Monte Carlo estimate and standard error of the lower posterior
/// probability of P(X <= Y) > c. Draws exactly equal to c do not count as
/// exceeding it.
pub fn lower_prob(x: &Sample, y: &Sample, config: &TestConfig) -> Result<(f64, f64)> {
    let mut count = 0u64;
    mc_posterior(x, y, config, |g_low, _| {
        if g_low > config.c {
            count += 1;
        }
    })?;
    let p = count as f64 / config.mc_samples as f64;
    Ok((p, binomial_se(p, config.mc_samples)))
}

/// Monte Carlo estimate and standard error of the upper posterior
/// probability of P(X <= Y) > c.
pub fn upper_prob(x: &Sample, y: &Sample, config: &TestConfig) -> Result<(f64, f64)> {
    let mut count = 0u64;
    mc_posterior(x, y, config, |_, g_up| {
        if g_up > config.c {
            count += 1;
        }
    })?;
    let p = count as f64 / config.mc_samples as f64;
    Ok((p, binomial_se(p, config.mc_samples)))
}

/// Paired draws of the lower and upper posterior variables, sharing weight
/// draws so that g_lower <= g_upper holds pathwise.
pub fn posterior_samples(
    x: &Sample,
    y: &Sample,
    config: &TestConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lower = Vec::with_capacity(config.mc_samples);
    let mut upper = Vec::with_capacity(config.mc_samples);
    mc_posterior(x, y, config, |g_low, g_up| {
        lower.push(g_low);
        upper.push(g_up);
    })?;
    Ok((lower, upper))
}

fn gaussian_exceedance(mu: f64, var: f64, c: f64) -> f64 {
    if var <= 0.0 {
        if mu > c {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - std_normal_cdf((c - mu) / var.sqrt())
    }
}

/// Gaussian approximation of the lower and upper posterior probabilities of
/// P(X <= Y) > c, using the closed-form moments. A degenerate distribution
/// (zero variance) reduces to the indicator of mu > c.
pub fn normal_approx_prob(x: &Sample, y: &Sample, config: &TestConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let (ml, vl) = moments_lower(x, y, config.s, config.ties)?;
    let (mu, vu) = moments_upper(x, y, config.s, config.ties)?;
    Ok((
        gaussian_exceedance(ml, vl, config.c),
        gaussian_exceedance(mu, vu, config.c),
    ))
}

pub(crate) fn decide_outcome(lower_prob: f64, upper_prob: f64, gamma: f64) -> Outcome {
    let threshold = 1.0 - gamma;
    if lower_prob > threshold && upper_prob > threshold {
        Outcome::Greater
    } else if lower_prob <= threshold && upper_prob <= threshold {
        Outcome::NotGreater
    } else {
        Outcome::Indeterminate
    }
}

/// The IDP rank-sum test: evaluates the posterior probability bounds of
/// P(X <= Y) > c and compares each against 1 - gamma.
pub fn idp_decide(x: &Sample, y: &Sample, config: &TestConfig) -> Result<Decision> {
    config.validate()?;
    let (lower_mean, upper_mean) = posterior_mean_bounds(x, y, config.s, config.ties)?;
    let (_, lower_var) = moments_lower(x, y, config.s, config.ties)?;
    let (_, upper_var) = moments_upper(x, y, config.s, config.ties)?;
    let (lower_p, upper_p, lower_se, upper_se) = match config.approx {
        ApproxMode::MonteCarlo => {
            let mut low = 0u64;
            let mut up = 0u64;
            mc_posterior(x, y, config, |g_low, g_up| {
                if g_low > config.c {
                    low += 1;
                }
                if g_up > config.c {
                    up += 1;
                }
            })?;
            let n = config.mc_samples as f64;
            let (pl, pu) = (low as f64 / n, up as f64 / n);
            (
                pl,
                pu,
                binomial_se(pl, config.mc_samples),
                binomial_se(pu, config.mc_samples),
            )
        }
        ApproxMode::Normal => {
            let (pl, pu) = normal_approx_prob(x, y, config)?;
            (pl, pu, 0.0, 0.0)
        }
    };
    Ok(Decision {
        outcome: decide_outcome(lower_p, upper_p, config.gamma),
        bounds: PosteriorBounds {
            lower_mean,
            upper_mean,
            lower_var,
            upper_var,
            lower_prob: lower_p,
            upper_prob: upper_p,
            lower_prob_se: lower_se,
            upper_prob_se: upper_se,
        },
        config: *config,
    })
}
