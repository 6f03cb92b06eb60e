//! Cross-cutting invariants: rank-statistic symmetries, probability-bound
//! orderings, nesting of the posterior intervals in the prior strength, and
//! statistical agreement between the comparison tests.

mod common;

use common::gaussian_sample;
use idp_core::seeds::rng_from_seed;
use idp_core::*;
use proptest::prelude::*;
use rand::Rng;

const SQRT2_M1: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Observations on a 0.001 grid: coarse enough to produce ties, spaced
/// widely enough that the monotone transforms below cannot collide.
fn gridded_values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-100_000i32..100_000).prop_map(|i| i as f64 * 1e-3), 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn u_statistic_pairs_partition(xs in gridded_values(12), ys in gridded_values(12)) {
        let x = Sample::new(xs).unwrap();
        let y = Sample::new(ys).unwrap();
        let forward = u_statistic(&x, &y, TieMode::Midrank);
        let backward = u_statistic(&y, &x, TieMode::Midrank);
        prop_assert_eq!(forward + backward, (x.len() * y.len()) as f64);
    }

    #[test]
    fn strict_equals_midrank_without_ties(xs in gridded_values(12), ys in gridded_values(12)) {
        prop_assume!(xs.iter().all(|a| !ys.contains(a)));
        let x = Sample::new(xs).unwrap();
        let y = Sample::new(ys).unwrap();
        prop_assert_eq!(
            u_statistic(&x, &y, TieMode::Strict),
            u_statistic(&x, &y, TieMode::Midrank)
        );
    }

    #[test]
    fn win_matrix_sums_to_u(xs in gridded_values(10), ys in gridded_values(10)) {
        let x = Sample::new(xs).unwrap();
        let y = Sample::new(ys).unwrap();
        for ties in [TieMode::Strict, TieMode::Midrank] {
            let m = win_matrix(&x, &y, ties);
            prop_assert!((m.grand_sum() - u_statistic(&x, &y, ties)).abs() < 1e-12);
        }
    }

    #[test]
    fn mww_p_value_is_rank_based(xs in gridded_values(10), ys in gridded_values(10)) {
        let x = Sample::new(xs.clone()).unwrap();
        let y = Sample::new(ys.clone()).unwrap();
        let (p, _) = mww_test(&x, &y, 0.05, MwwMethod::NormalApprox).unwrap();
        let transforms: [fn(f64) -> f64; 3] =
            [|v| 2.0 * v + 1.0, |v| v * v * v, |v| v.atan()];
        for t in transforms {
            let tx = Sample::new(xs.iter().map(|&v| t(v)).collect()).unwrap();
            let ty = Sample::new(ys.iter().map(|&v| t(v)).collect()).unwrap();
            let (tp, _) = mww_test(&tx, &ty, 0.05, MwwMethod::NormalApprox).unwrap();
            prop_assert_eq!(p, tp);
        }
    }

    #[test]
    fn interval_width_identity(xs in gridded_values(16), ys in gridded_values(16), s in 0.0f64..4.0) {
        let x = Sample::new(xs).unwrap();
        let y = Sample::new(ys).unwrap();
        let (lo, hi) = posterior_mean_bounds(&x, &y, s, TieMode::Midrank).unwrap();
        let width = interval_width(s, x.len() as f64, y.len() as f64);
        prop_assert!(((hi - lo) - width).abs() < 1e-12);
    }

    #[test]
    fn mean_bounds_nest_in_s(xs in gridded_values(12), ys in gridded_values(12), s1 in 0.0f64..2.0, extra in 0.01f64..2.0) {
        let x = Sample::new(xs).unwrap();
        let y = Sample::new(ys).unwrap();
        let s2 = s1 + extra;
        let (lo1, hi1) = posterior_mean_bounds(&x, &y, s1, TieMode::Midrank).unwrap();
        let (lo2, hi2) = posterior_mean_bounds(&x, &y, s2, TieMode::Midrank).unwrap();
        prop_assert!(lo2 <= lo1 + 1e-12 && hi2 >= hi1 - 1e-12);
    }
}

#[test]
fn exact_and_normal_p_values_agree_for_moderate_n() {
    let mut rng = rng_from_seed(301);
    for _ in 0..20 {
        let shift = rng.random::<f64>() - 0.5;
        let x = gaussian_sample(&mut rng, 10, 0.0);
        let y = gaussian_sample(&mut rng, 10, shift);
        let (p_exact, _) = mww_test(&x, &y, 0.05, MwwMethod::ExactPermutation).unwrap();
        let (p_normal, _) = mww_test(&x, &y, 0.05, MwwMethod::NormalApprox).unwrap();
        assert!(
            (p_exact - p_normal).abs() < 0.03,
            "exact {p_exact} vs normal {p_normal}"
        );
    }
}

#[test]
fn monte_carlo_bounds_are_ordered_and_nested_in_s() {
    let mut rng = rng_from_seed(302);
    for trial in 0..10 {
        let x = gaussian_sample(&mut rng, 4 + trial % 5, 0.0);
        let y = gaussian_sample(&mut rng, 3 + trial % 6, 0.3);
        let mut previous: Option<(f64, f64, f64, f64)> = None;
        for &s in &[0.2, SQRT2_M1, 1.0, 2.0] {
            let config = TestConfig {
                s,
                mc_samples: 20_000,
                seed: 500 + trial as u64,
                ..TestConfig::default()
            };
            let d = idp_decide(&x, &y, &config).unwrap();
            let b = d.bounds;
            // coupled draws make the ordering exact, not just statistical
            assert!(b.lower_prob <= b.upper_prob);
            assert!(b.lower_mean <= b.upper_mean);
            if let Some((plo, phi, selo, sehi)) = previous {
                let slack_lo = 4.0 * (b.lower_prob_se.powi(2) + selo * selo).sqrt() + 1e-9;
                let slack_hi = 4.0 * (b.upper_prob_se.powi(2) + sehi * sehi).sqrt() + 1e-9;
                assert!(
                    b.lower_prob <= plo + slack_lo,
                    "lower bound must not grow with s: {} vs {plo}",
                    b.lower_prob
                );
                assert!(
                    b.upper_prob >= phi - slack_hi,
                    "upper bound must not shrink with s: {} vs {phi}",
                    b.upper_prob
                );
            }
            previous = Some((b.lower_prob, b.upper_prob, b.lower_prob_se, b.upper_prob_se));
        }
    }
}

#[test]
fn normal_mode_bounds_are_ordered_and_nested_in_s() {
    let mut rng = rng_from_seed(303);
    for _ in 0..10 {
        let x = gaussian_sample(&mut rng, 30, 0.0);
        let y = gaussian_sample(&mut rng, 35, 0.2);
        let mut previous: Option<(f64, f64)> = None;
        for &s in &[0.2, SQRT2_M1, 1.0, 2.0] {
            let config = TestConfig {
                s,
                approx: ApproxMode::Normal,
                ..TestConfig::default()
            };
            let d = idp_decide(&x, &y, &config).unwrap();
            let (lo, hi) = (d.bounds.lower_prob, d.bounds.upper_prob);
            assert!(lo <= hi + 1e-12);
            if let Some((plo, phi)) = previous {
                assert!(lo <= plo + 1e-9, "lower {lo} vs {plo} at s={s}");
                assert!(hi >= phi - 1e-9, "upper {hi} vs {phi} at s={s}");
            }
            previous = Some((lo, hi));
        }
    }
}

#[test]
fn interval_width_vanishes_at_rate_one_over_n() {
    for &s in &[SQRT2_M1, 1.0, 4.0] {
        for &n in &[10.0f64, 100.0, 1_000.0, 10_000.0] {
            let width = interval_width(s, n, n);
            let bound = 2.0 * s * (2.0 * n + s) / (n * n);
            assert!(width < bound, "width {width} vs bound {bound} at s={s}, n={n}");
        }
    }
}

#[test]
fn indeterminacy_shrinks_with_sample_size() {
    let mut rates = Vec::new();
    for &n in &[10usize, 20, 40] {
        let spec = ExperimentSpec {
            delta_grid: vec![0.0],
            n1: n,
            n2: n,
            runs: 1_000,
            gamma: 0.05,
            k0: 1.0,
            k1: 19.0,
            s: SQRT2_M1,
            mc_samples: 4_000,
            seed: 304,
            generator: Generator::GaussianShift,
            tests: vec![TestKind::Idp],
            approx: ApproxMode::MonteCarlo,
        };
        let result = run_experiment(&spec).unwrap();
        rates.push(result.cell(0, TestKind::Idp).indeterminacy);
    }
    let runs = 1_000f64;
    for pair in rates.windows(2) {
        let (bigger_n_rate, smaller_n_rate) = (pair[1], pair[0]);
        let se = ((smaller_n_rate * (1.0 - smaller_n_rate) + bigger_n_rate * (1.0 - bigger_n_rate))
            / runs)
            .sqrt();
        assert!(
            bigger_n_rate <= smaller_n_rate + 2.0 * se,
            "indeterminacy must not grow with n: {rates:?}"
        );
    }
}

#[test]
fn fifty_fifty_loss_tracks_bb_loss() {
    // the two comparison devices should be statistically indistinguishable
    // in mean loss over a shift grid
    let spec_for = |delta: f64| ExperimentSpec {
        delta_grid: vec![delta],
        n1: 10,
        n2: 10,
        runs: 3_000,
        gamma: 0.5,
        k0: 1.0,
        k1: 1.0,
        s: SQRT2_M1,
        mc_samples: 2_000,
        seed: 305,
        generator: Generator::GaussianShift,
        tests: vec![TestKind::BbDp, TestKind::FiftyFifty],
        approx: ApproxMode::MonteCarlo,
    };
    for delta in [-0.5, 0.0, 0.5] {
        let result = run_experiment(&spec_for(delta)).unwrap();
        let bb = result.cell(0, TestKind::BbDp).mean_loss;
        let ff = result.cell(0, TestKind::FiftyFifty).mean_loss;
        assert!(
            (bb - ff).abs() < 0.05,
            "delta {delta}: bb loss {bb} vs fifty-fifty loss {ff}"
        );
    }
}

#[test]
fn posterior_dump_reproduces_closed_form_means() {
    let mut rng = rng_from_seed(306);
    let x = gaussian_sample(&mut rng, 12, 0.0);
    let y = gaussian_sample(&mut rng, 9, 0.4);
    let config = TestConfig {
        mc_samples: 30_000,
        seed: 306,
        ..TestConfig::default()
    };
    let (lows, ups) = posterior_samples(&x, &y, &config).unwrap();
    let (mu_l, var_l) = moments_lower(&x, &y, config.s, config.ties).unwrap();
    let (mu_u, var_u) = moments_upper(&x, &y, config.s, config.ties).unwrap();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let n = config.mc_samples as f64;
    assert!((mean(&lows) - mu_l).abs() < 4.0 * (var_l / n).sqrt());
    assert!((mean(&ups) - mu_u).abs() < 4.0 * (var_u / n).sqrt());
}
