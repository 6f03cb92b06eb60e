//! Deterministic dataset builders shared by the benchmarks.

use idp_core::{Sample, seeds::rng_from_seed};
use rand::Rng;
use rand_distr::StandardNormal;

/// A standard-normal sample of size `n`, optionally shifted, reproducible
/// from the seed.
pub fn gaussian_sample(seed: u64, n: usize, shift: f64) -> Sample {
    let mut rng = rng_from_seed(seed);
    Sample::new(
        (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal) + shift)
            .collect(),
    )
    .expect("finite draws")
}
