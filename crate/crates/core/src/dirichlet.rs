//! Sampling and moments of the posterior weight vectors
//! (w0, w1, ..., wn) ~ Dir(s, 1, ..., 1).
//!
//! A posterior draw over n observed atoms plus one prior atom is fully
//! described by such a weight vector, so draws reduce to normalizing one
//! Gamma(s) variate against n unit exponentials. No stick-breaking is
//! involved anywhere in this crate.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A draw from Dir(s, 1, ..., 1): the prior-atom weight w0 followed by one
/// weight per observation. Entries are non-negative and sum to one; w0 is
/// exactly zero when s = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    prior: f64,
    obs: Vec<f64>,
}

impl WeightVector {
    pub fn prior_weight(&self) -> f64 {
        self.prior
    }

    pub fn observation_weights(&self) -> &[f64] {
        &self.obs
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn observation_sum(&self) -> f64 {
        self.obs.iter().sum()
    }
}

/// Sampler for Dir(s, 1, ..., 1) over n observation atoms.
///
/// The s = 0 limit is handled structurally (w0 identically zero, the
/// observation weights uniform on the simplex) rather than as a degenerate
/// Gamma shape.
#[derive(Debug, Clone)]
pub struct PosteriorWeights {
    n: usize,
    prior_gamma: Option<Gamma<f64>>,
}

impl PosteriorWeights {
    pub fn new(s: f64, n: usize) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
        }
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        let prior_gamma = if s == 0.0 {
            None
        } else {
            // Valid for every shape s > 0, including s < 1.
            Some(Gamma::new(s, 1.0).map_err(|e| Error::param("s", e.to_string()))?)
        };
        Ok(PosteriorWeights { n, prior_gamma })
    }
}

impl Distribution<WeightVector> for PosteriorWeights {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WeightVector {
        let raw_prior = match &self.prior_gamma {
            Some(g) => g.sample(rng),
            None => 0.0,
        };
        let mut obs: Vec<f64> = (0..self.n).map(|_| rng.sample(Exp1)).collect();
        let total = raw_prior + obs.iter().sum::<f64>();
        for w in &mut obs {
            *w /= total;
        }
        WeightVector {
            prior: raw_prior / total,
            obs,
        }
    }
}

/// One draw from Dir(s, 1, ..., 1).
pub fn sample_weights<R: Rng + ?Sized>(s: f64, n: usize, rng: &mut R) -> Result<WeightVector> {
    Ok(PosteriorWeights::new(s, n)?.sample(rng))
}

/// Closed-form first and second moments of the weight vector.
///
/// Non-augmented: E[w_j] = 1/(s+n) and
/// E[w_j w_k] = (1 + [j = k]) / ((s+n)(s+n+1)) over the n observation
/// weights. Augmented prepends the prior atom, with E[w0] = s/(s+n),
/// E[w0^2] = s(s+1)/((s+n)(s+n+1)) and E[w0 w_j] = s/((s+n)(s+n+1)).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMoments {
    pub mean: Vec<f64>,
    pub augmented: bool,
    second: Vec<f64>,
    dim: usize,
}

impl WeightMoments {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Second moment E[w_j w_k], indexed over the same dimension as `mean`.
    pub fn second(&self, j: usize, k: usize) -> f64 {
        self.second[j * self.dim + k]
    }
}

pub fn weight_moments(s: f64, n: usize, augmented: bool) -> Result<WeightMoments> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param("s", format!("must be finite and >= 0, got {s}")));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let sn = s + n as f64;
    let d = sn * (sn + 1.0);
    let dim = if augmented { n + 1 } else { n };
    let mut mean = vec![1.0 / sn; dim];
    let mut second = vec![1.0 / d; dim * dim];
    for j in 0..dim {
        second[j * dim + j] = 2.0 / d;
    }
    if augmented {
        mean[0] = s / sn;
        second[0] = s * (s + 1.0) / d;
        for j in 1..dim {
            second[j] = s / d;
            second[j * dim] = s / d;
        }
    }
    Ok(WeightMoments {
        mean,
        augmented,
        second,
        dim,
    })
}
