//! Rank statistics shared by every test: pairwise win counts, the U
//! statistic, the win matrix A, and the frequentist MWW baseline.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::sample::{Sample, TieMode};

/// Largest per-group size accepted by the exact permutation method.
pub const EXACT_PERMUTATION_LIMIT: usize = 12;

/// Heaviside step: 1 for z > 0, 1/2 for z = 0, 0 for z < 0.
pub fn heaviside(z: f64) -> f64 {
    debug_assert!(!z.is_nan());
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        0.0
    } else {
        0.5
    }
}

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    // Unit normal is always constructible.
    Normal::new(0.0, 1.0).unwrap().cdf(z)
}

/// Per-probe counts of reference values strictly below / exactly equal.
/// `reference` must be sorted ascending.
fn below_and_tied(probes: &[f64], reference: &[f64]) -> (Vec<u32>, Vec<u32>) {
    let mut below = Vec::with_capacity(probes.len());
    let mut tied = Vec::with_capacity(probes.len());
    for &p in probes {
        let lo = reference.partition_point(|&v| v < p);
        let hi = reference.partition_point(|&v| v <= p);
        below.push(lo as u32);
        tied.push((hi - lo) as u32);
    }
    (below, tied)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Pairwise comparison tallies of a sample pair, computed in
/// O((n1 + n2) log(n1 + n2)) without materializing the win matrix.
///
/// `row(j)` is the j-th row sum of A (the pairwise score of x_j against all
/// of y); `col(k)` is the k-th column sum. Positions of each x_j within the
/// sorted y values are kept for weighted tail sums in the Monte Carlo path.
#[derive(Debug, Clone)]
pub(crate) struct PairTally {
    pub n1: usize,
    pub n2: usize,
    pub ties: TieMode,
    /// per x_j: number of y strictly below x_j
    pub y_below_x: Vec<u32>,
    /// per x_j: number of y tied with x_j
    pub y_tied_x: Vec<u32>,
    /// per y_k: number of x strictly below y_k
    pub x_below_y: Vec<u32>,
    /// per y_k: number of x tied with y_k
    pub x_tied_y: Vec<u32>,
    /// indices of y in ascending value order
    pub y_order: Vec<u32>,
}

impl PairTally {
    pub fn new(x: &Sample, y: &Sample, ties: TieMode) -> Self {
        let ys = sorted(y.values());
        let xs = sorted(x.values());
        let (y_below_x, y_tied_x) = below_and_tied(x.values(), &ys);
        let (x_below_y, x_tied_y) = below_and_tied(y.values(), &xs);
        let mut y_order: Vec<u32> = (0..y.len() as u32).collect();
        y_order.sort_unstable_by(|&a, &b| {
            y.values()[a as usize]
                .partial_cmp(&y.values()[b as usize])
                .unwrap()
        });
        PairTally {
            n1: x.len(),
            n2: y.len(),
            ties,
            y_below_x,
            y_tied_x,
            x_below_y,
            x_tied_y,
            y_order,
        }
    }

    /// Row sum of A for observation x_j.
    pub fn row(&self, j: usize) -> f64 {
        let wins = (self.n2 as u32 - self.y_below_x[j] - self.y_tied_x[j]) as f64;
        match self.ties {
            TieMode::Strict => wins,
            TieMode::Midrank => wins + 0.5 * self.y_tied_x[j] as f64,
        }
    }

    /// Column sum of A for observation y_k.
    pub fn col(&self, k: usize) -> f64 {
        let wins = self.x_below_y[k] as f64;
        match self.ties {
            TieMode::Strict => wins,
            TieMode::Midrank => wins + 0.5 * self.x_tied_y[k] as f64,
        }
    }

    pub fn u(&self) -> f64 {
        (0..self.n1).map(|j| self.row(j)).sum()
    }
}

/// Scalar summaries of the win matrix used by the closed-form moments:
/// the grand sum U, the sum of squared entries, and the sums of squared
/// row and column sums.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WinStats {
    pub u: f64,
    pub sum_sq: f64,
    pub row_sq: f64,
    pub col_sq: f64,
}

impl WinStats {
    pub fn from_tally(tally: &PairTally) -> Self {
        let mut u = 0.0;
        let mut sum_sq = 0.0;
        let mut row_sq = 0.0;
        for j in 0..tally.n1 {
            let r = tally.row(j);
            u += r;
            row_sq += r * r;
            let wins = (tally.n2 as u32 - tally.y_below_x[j] - tally.y_tied_x[j]) as f64;
            sum_sq += match tally.ties {
                TieMode::Strict => wins,
                TieMode::Midrank => wins + 0.25 * tally.y_tied_x[j] as f64,
            };
        }
        let col_sq = (0..tally.n2)
            .map(|k| {
                let c = tally.col(k);
                c * c
            })
            .sum();
        WinStats {
            u,
            sum_sq,
            row_sq,
            col_sq,
        }
    }
}

pub(crate) fn win_stats(x: &Sample, y: &Sample, ties: TieMode) -> WinStats {
    WinStats::from_tally(&PairTally::new(x, y, ties))
}

/// The n1 x n2 matrix of pairwise scores a_jk: the indicator of x_j < y_k
/// under `Strict`, the Heaviside step of y_k - x_j under `Midrank`.
#[derive(Debug, Clone, PartialEq)]
pub struct WinMatrix {
    n1: usize,
    n2: usize,
    entries: Vec<f64>,
}

impl WinMatrix {
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.entries[j * self.n2 + k]
    }

    pub fn grand_sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n2)
    }
}

pub fn win_matrix(x: &Sample, y: &Sample, ties: TieMode) -> WinMatrix {
    let mut entries = Vec::with_capacity(x.len() * y.len());
    for &xj in x.values() {
        for &yk in y.values() {
            entries.push(match ties {
                TieMode::Strict => {
                    if xj < yk {
                        1.0
                    } else {
                        0.0
                    }
                }
                TieMode::Midrank => heaviside(yk - xj),
            });
        }
    }
    WinMatrix {
        n1: x.len(),
        n2: y.len(),
        entries,
    }
}

/// The two-sample rank statistic U: the number of pairs with x < y, plus
/// half the number of tied pairs under `Midrank`. Value lies in [0, n1*n2].
pub fn u_statistic(x: &Sample, y: &Sample, ties: TieMode) -> f64 {
    PairTally::new(x, y, ties).u()
}

/// How the null distribution of U is evaluated by [`mww_test`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MwwMethod {
    /// Normal limit with mean 1/2 and variance (n1+n2)/(12 n1 n2) for
    /// U/(n1 n2). No continuity correction, no tie correction.
    NormalApprox,
    /// Exact null distribution of U over all rank arrangements, computed by
    /// dynamic programming. Small samples only; assumes untied data.
    ExactPermutation,
}

/// One-sided MWW rank-sum test of F_X = F_Y against the alternative that
/// P(X <= Y) > 1/2. Returns the p-value and the rejection decision
/// `p < gamma`.
pub fn mww_test(x: &Sample, y: &Sample, gamma: f64, method: MwwMethod) -> Result<(f64, bool)> {
    if !(gamma.is_finite() && gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    let n1 = x.len();
    let n2 = y.len();
    let u = u_statistic(x, y, TieMode::Midrank);
    let p = match method {
        MwwMethod::NormalApprox => {
            let nn = (n1 * n2) as f64;
            let var = (n1 + n2) as f64 / (12.0 * nn);
            let z = (u / nn - 0.5) / var.sqrt();
            1.0 - std_normal_cdf(z)
        }
        MwwMethod::ExactPermutation => {
            if n1 > EXACT_PERMUTATION_LIMIT || n2 > EXACT_PERMUTATION_LIMIT {
                return Err(Error::PermutationTooLarge {
                    n1,
                    n2,
                    limit: EXACT_PERMUTATION_LIMIT,
                });
            }
            exact_u_tail_prob(n1, n2, u)
        }
    };
    Ok((p, p < gamma))
}

/// P(U >= u_obs) under the exact null distribution of U for untied
/// arrangements of n1 + n2 ranks.
///
/// Counts c(m, n, u) of arrangements with statistic u satisfy
/// c(m, n, u) = c(m-1, n, u) + c(m, n-1, u-m): condition on whether the
/// largest value belongs to the x group (contributing no wins) or the
/// y group (beating all m x values).
fn exact_u_tail_prob(n1: usize, n2: usize, u_obs: f64) -> f64 {
    let umax = n1 * n2;
    // layer n = 0: all mass at u = 0 for every m
    let mut prev = vec![vec![0.0f64; umax + 1]; n1 + 1];
    for row in prev.iter_mut() {
        row[0] = 1.0;
    }
    for _ in 1..=n2 {
        let mut cur = vec![vec![0.0f64; umax + 1]; n1 + 1];
        cur[0][0] = 1.0;
        for m in 1..=n1 {
            for u in 0..=umax {
                let same_layer = cur[m - 1][u];
                let carried = if u >= m { prev[m][u - m] } else { 0.0 };
                cur[m][u] = same_layer + carried;
            }
        }
        prev = cur;
    }
    let dist = &prev[n1];
    let total: f64 = dist.iter().sum();
    let tail: f64 = dist
        .iter()
        .enumerate()
        .filter(|&(u, _)| u as f64 >= u_obs)
        .map(|(_, c)| c)
        .sum();
    tail / total
}
