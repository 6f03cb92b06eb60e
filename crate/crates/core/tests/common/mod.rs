//! Shared test support: an independently coded Dirichlet-weight sampler,
//! literal double-loop evaluations of the posterior variable g, and small
//! statistical helpers.
//!
//! The oracle sampler deliberately avoids the library's gamma-normalization
//! path: it builds Dir(1, ..., 1, s) by sequential Beta(1, b) sticks drawn
//! through the inverse CDF, using nothing but uniforms. Agreement between
//! the closed forms, the library sampler and this oracle pins all three.

#![allow(dead_code)]

use idp_core::{Sample, TieMode};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// One draw of (w0, w1..wn) ~ Dir(s, 1, ..., 1) via sequential sticks.
/// Consumes exactly n uniforms.
pub fn oracle_weights<R: Rng>(s: f64, n: usize, rng: &mut R) -> (f64, Vec<f64>) {
    assert!(s >= 0.0 && n >= 1);
    let mut remaining = 1.0f64;
    let mut obs = Vec::with_capacity(n);
    for j in 1..=n {
        let b = (n - j) as f64 + s;
        let u: f64 = rng.random();
        let v = if b == 0.0 { 1.0 } else { 1.0 - u.powf(1.0 / b) };
        obs.push(v * remaining);
        remaining *= 1.0 - v;
    }
    (remaining, obs)
}

/// Literal double loop over all pairs: g = sum_jk w1j w2k a_jk.
pub fn oracle_g_lower(x: &Sample, y: &Sample, ties: TieMode, w1: &[f64], w2: &[f64]) -> f64 {
    let mut g = 0.0;
    for (j, &xj) in x.values().iter().enumerate() {
        for (k, &yk) in y.values().iter().enumerate() {
            let a = match ties {
                TieMode::Strict => {
                    if xj < yk {
                        1.0
                    } else {
                        0.0
                    }
                }
                TieMode::Midrank => {
                    if xj < yk {
                        1.0
                    } else if xj == yk {
                        0.5
                    } else {
                        0.0
                    }
                }
            };
            g += w1[j] * w2[k] * a;
        }
    }
    g
}

/// The augmented variable: w10 w20 + w10 sum(w2) + w20 sum(w1) + g_lower.
pub fn oracle_g_upper(
    x: &Sample,
    y: &Sample,
    ties: TieMode,
    w10: f64,
    w1: &[f64],
    w20: f64,
    w2: &[f64],
) -> f64 {
    let s1: f64 = w1.iter().sum();
    let s2: f64 = w2.iter().sum();
    w10 * w20 + w10 * s2 + w20 * s1 + oracle_g_lower(x, y, ties, w1, w2)
}

/// Running raw power sums for mean/variance estimates with standard errors.
#[derive(Default, Clone, Copy)]
pub struct MomentAccumulator {
    pub n: u64,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.s1 += v;
        let v2 = v * v;
        self.s2 += v2;
        self.s3 += v2 * v;
        self.s4 += v2 * v2;
    }

    pub fn mean(&self) -> f64 {
        self.s1 / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        (self.s2 / n - self.mean().powi(2)).max(0.0)
    }

    pub fn mean_se(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Standard error of the sample variance via the central fourth moment.
    pub fn variance_se(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        let m4 = self.s4 / n - 4.0 * m * self.s3 / n + 6.0 * m * m * self.s2 / n - 3.0 * m.powi(4);
        (((m4 - self.variance().powi(2)).max(0.0)) / n).sqrt()
    }
}

pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// One-sample Kolmogorov-Smirnov distance between `draws` and `cdf`.
pub fn ks_distance(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = draws.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in sorted.iter().enumerate() {
        let f = cdf(v);
        d = d.max((((i + 1) as f64) / n - f).abs());
        d = d.max((f - (i as f64) / n).abs());
    }
    d
}

pub fn std_normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(z)
}

/// Gaussian sample generator for test fixtures.
pub fn gaussian_sample<R: Rng>(rng: &mut R, n: usize, shift: f64) -> Sample {
    use rand_distr::StandardNormal;
    Sample::new(
        (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal) + shift)
            .collect(),
    )
    .unwrap()
}
