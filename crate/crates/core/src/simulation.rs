//! Monte Carlo experiment runner: location-shift scenarios, loss
//! evaluation, and accuracy/power/indeterminacy aggregation across the
//! tests under comparison.
//!
//! Every run is a pure function of (master seed, delta index, run index),
//! with one derived RNG stream per role (sample generation, IDP draws,
//! BB-DP draws, coin flips). Adding or removing tests therefore never
//! perturbs the generated samples, and aggregation reduces to integer
//! counter sums, so results are identical for any sharding of the runs.

use rand::Rng;
use rand_distr::{StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{bb_test, fifty_fifty};
use crate::error::{Error, Result};
use crate::idp::{idp_decide, ApproxMode, Outcome, TestConfig};
use crate::sample::{Sample, TieMode};
use crate::seeds::{derive_seed, rng_from_seed};
use crate::stats::{mww_test, MwwMethod};

const ROLE_SAMPLES: u64 = 0;
const ROLE_IDP: u64 = 1;
const ROLE_BB: u64 = 2;
const ROLE_COIN: u64 = 3;

/// Data-generating process for one run. `delta` is the location shift of
/// the y population where applicable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Generator {
    /// X ~ N(0,1), Y ~ N(delta, 1).
    GaussianShift,
    /// X ~ t(df), Y ~ t(df) + delta.
    StudentTShift { df: f64 },
    /// X ~ N(0,1), Y ~ N(0, sigma2). The shift is ignored: P(X <= Y) = 1/2
    /// for every sigma2, which is exactly the regime where the MWW null
    /// breaks down.
    GaussianScale { sigma2: f64 },
}

impl Generator {
    fn validate(&self) -> Result<()> {
        match *self {
            Generator::GaussianShift => Ok(()),
            Generator::StudentTShift { df } => {
                if df.is_finite() && df > 0.0 {
                    Ok(())
                } else {
                    Err(Error::param("df", format!("must be finite and > 0, got {df}")))
                }
            }
            Generator::GaussianScale { sigma2 } => {
                if sigma2.is_finite() && sigma2 > 0.0 {
                    Ok(())
                } else {
                    Err(Error::param(
                        "sigma2",
                        format!("must be finite and > 0, got {sigma2}"),
                    ))
                }
            }
        }
    }

    fn draw<R: Rng>(&self, delta: f64, n1: usize, n2: usize, rng: &mut R) -> (Sample, Sample) {
        let (x, y): (Vec<f64>, Vec<f64>) = match *self {
            Generator::GaussianShift => (
                (0..n1).map(|_| rng.sample(StandardNormal)).collect(),
                (0..n2)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) + delta)
                    .collect(),
            ),
            Generator::StudentTShift { df } => {
                let t = StudentT::new(df).expect("validated df");
                (
                    (0..n1).map(|_| rng.sample(t)).collect(),
                    (0..n2).map(|_| rng.sample::<f64, _>(t) + delta).collect(),
                )
            }
            Generator::GaussianScale { sigma2 } => {
                let sigma = sigma2.sqrt();
                (
                    (0..n1).map(|_| rng.sample(StandardNormal)).collect(),
                    (0..n2)
                        .map(|_| rng.sample::<f64, _>(StandardNormal) * sigma)
                        .collect(),
                )
            }
        };
        (
            Sample::new(x).expect("finite draws"),
            Sample::new(y).expect("finite draws"),
        )
    }
}

/// Whether P(X <= Y) > 1/2 holds under the generator. Equality counts as
/// "not greater": at delta = 0 (and for any scale mixture) the probability
/// is exactly one half.
pub fn true_hypothesis(generator: &Generator, delta: f64) -> bool {
    match generator {
        Generator::GaussianShift | Generator::StudentTShift { .. } => delta > 0.0,
        Generator::GaussianScale { .. } => false,
    }
}

/// Loss of taking `action` (a = 1 declares the hypothesis) when the truth
/// is `true_hypothesis`: K0 for a miss, K1 for a false declaration.
pub fn loss_eval(true_hypothesis: bool, action: bool, k0: f64, k1: f64) -> f64 {
    match (action, true_hypothesis) {
        (false, true) => k0,
        (true, false) => k1,
        _ => 0.0,
    }
}

/// Tests that can enter the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    Idp,
    Mww,
    BbDp,
    FiftyFifty,
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TestKind::Idp => "idp",
            TestKind::Mww => "mww",
            TestKind::BbDp => "bbdp",
            TestKind::FiftyFifty => "fifty-fifty",
        })
    }
}

impl std::str::FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "idp" => Ok(TestKind::Idp),
            "mww" => Ok(TestKind::Mww),
            "bbdp" => Ok(TestKind::BbDp),
            "fifty-fifty" => Ok(TestKind::FiftyFifty),
            other => Err(Error::param(
                "tests",
                format!("unknown test `{other}` (expected idp, mww, bbdp or fifty-fifty)"),
            )),
        }
    }
}

/// Full description of one experiment. `gamma` must equal K0/(K0+K1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub delta_grid: Vec<f64>,
    pub n1: usize,
    pub n2: usize,
    /// Monte Carlo repetitions per delta.
    pub runs: usize,
    pub gamma: f64,
    pub k0: f64,
    pub k1: f64,
    /// IDP prior strength.
    pub s: f64,
    /// Posterior-probability draws per run.
    pub mc_samples: usize,
    pub seed: u64,
    pub generator: Generator,
    pub tests: Vec<TestKind>,
    /// How IDP posterior probabilities are evaluated within each run.
    pub approx: ApproxMode,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.delta_grid.is_empty() {
            return Err(Error::param("delta_grid", "must contain at least one value"));
        }
        if let Some(bad) = self.delta_grid.iter().find(|d| !d.is_finite()) {
            return Err(Error::param("delta_grid", format!("non-finite shift {bad}")));
        }
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::param("n1/n2", "sample sizes must be at least 1"));
        }
        if self.runs == 0 {
            return Err(Error::param("runs", "must be at least 1"));
        }
        if !(self.k0 >= 0.0 && self.k1 >= 0.0 && self.k0 + self.k1 > 0.0) {
            return Err(Error::param(
                "k0/k1",
                format!("need non-negative weights with K0+K1 > 0, got {} and {}", self.k0, self.k1),
            ));
        }
        let implied = self.k0 / (self.k0 + self.k1);
        if (self.gamma - implied).abs() >= 1e-12 {
            return Err(Error::param(
                "gamma",
                format!(
                    "gamma = {} inconsistent with K0/(K0+K1) = {implied}",
                    self.gamma
                ),
            ));
        }
        if self.tests.is_empty() {
            return Err(Error::param("tests", "must request at least one test"));
        }
        for (i, t) in self.tests.iter().enumerate() {
            if self.tests[..i].contains(t) {
                return Err(Error::param("tests", format!("duplicate test `{t}`")));
            }
        }
        self.generator.validate()?;
        // checks gamma, s, mc_samples ranges
        self.test_config(0).validate()
    }

    fn test_config(&self, seed: u64) -> TestConfig {
        TestConfig {
            s: self.s,
            gamma: self.gamma,
            c: 0.5,
            mc_samples: self.mc_samples,
            seed,
            ties: TieMode::Midrank,
            approx: self.approx,
        }
    }
}

/// Integer outcome tallies for one (delta, test) cell. All aggregation is
/// exact, so merge order never changes a result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub greater: u64,
    pub not_greater: u64,
    pub indeterminate: u64,
    /// Determinate decisions matching the generator truth.
    pub correct: u64,
    /// Missed true hypotheses (action 0 while true); each costs K0.
    pub false_negatives: u64,
    /// False declarations (action 1 while false); each costs K1.
    pub false_positives: u64,
}

impl OutcomeCounts {
    fn record(&mut self, action: Option<bool>, truth: bool) {
        match action {
            Some(true) => {
                self.greater += 1;
                if truth {
                    self.correct += 1;
                } else {
                    self.false_positives += 1;
                }
            }
            Some(false) => {
                self.not_greater += 1;
                if !truth {
                    self.correct += 1;
                } else {
                    self.false_negatives += 1;
                }
            }
            None => self.indeterminate += 1,
        }
    }

    fn merge(mut self, other: OutcomeCounts) -> OutcomeCounts {
        self.greater += other.greater;
        self.not_greater += other.not_greater;
        self.indeterminate += other.indeterminate;
        self.correct += other.correct;
        self.false_negatives += other.false_negatives;
        self.false_positives += other.false_positives;
        self
    }

    pub fn determinate(&self) -> u64 {
        self.greater + self.not_greater
    }
}

/// Aggregated metrics for one (delta, test) pair.
///
/// `accuracy` and `power` are fractions of all runs (an indeterminate IDP
/// run counts toward neither). `mean_loss` averages over all runs for the
/// always-determinate tests and over determinate runs for the IDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub delta: f64,
    pub test: TestKind,
    pub counts: OutcomeCounts,
    pub accuracy: f64,
    pub power: f64,
    pub mean_loss: f64,
    pub indeterminacy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    /// One entry per (delta, test), delta-major in grid order, tests in
    /// request order.
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn cell(&self, delta_idx: usize, test: TestKind) -> &CellResult {
        &self.cells[delta_idx * self.spec.tests.len()
            + self
                .spec
                .tests
                .iter()
                .position(|&t| t == test)
                .expect("test not part of the experiment")]
    }
}

fn run_once(spec: &ExperimentSpec, delta_idx: usize, run: usize) -> Result<Vec<OutcomeCounts>> {
    let delta = spec.delta_grid[delta_idx];
    let run_key = derive_seed(&[spec.seed, delta_idx as u64, run as u64]);
    let mut sample_rng = rng_from_seed(derive_seed(&[run_key, ROLE_SAMPLES]));
    let (x, y) = spec.generator.draw(delta, spec.n1, spec.n2, &mut sample_rng);
    let truth = true_hypothesis(&spec.generator, delta);

    let needs_idp = spec
        .tests
        .iter()
        .any(|t| matches!(t, TestKind::Idp | TestKind::FiftyFifty));
    let decision = if needs_idp {
        let config = spec.test_config(derive_seed(&[run_key, ROLE_IDP]));
        Some(idp_decide(&x, &y, &config)?)
    } else {
        None
    };

    let mut counts = vec![OutcomeCounts::default(); spec.tests.len()];
    for (slot, test) in spec.tests.iter().enumerate() {
        let action = match test {
            TestKind::Idp => match decision.as_ref().unwrap().outcome {
                Outcome::Greater => Some(true),
                Outcome::NotGreater => Some(false),
                Outcome::Indeterminate => None,
            },
            TestKind::Mww => {
                let (_, reject) = mww_test(&x, &y, spec.gamma, MwwMethod::NormalApprox)?;
                Some(reject)
            }
            TestKind::BbDp => {
                let seed = derive_seed(&[run_key, ROLE_BB]);
                let (_, accept) = bb_test(&x, &y, spec.gamma, 0.5, spec.mc_samples, seed)?;
                Some(accept)
            }
            TestKind::FiftyFifty => {
                let mut coin = rng_from_seed(derive_seed(&[run_key, ROLE_COIN]));
                Some(fifty_fifty(decision.as_ref().unwrap(), &mut coin))
            }
        };
        counts[slot].record(action, truth);
    }
    Ok(counts)
}

fn zero_counts(spec: &ExperimentSpec) -> Vec<OutcomeCounts> {
    vec![OutcomeCounts::default(); spec.tests.len()]
}

fn merge_counts(mut a: Vec<OutcomeCounts>, b: Vec<OutcomeCounts>) -> Vec<OutcomeCounts> {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.merge(y);
    }
    a
}

fn cells_from_counts(
    spec: &ExperimentSpec,
    delta: f64,
    counts: Vec<OutcomeCounts>,
) -> Vec<CellResult> {
    let runs = spec.runs as f64;
    spec.tests
        .iter()
        .zip(counts)
        .map(|(&test, c)| {
            let loss_sum = spec.k0 * c.false_negatives as f64 + spec.k1 * c.false_positives as f64;
            let loss_denom = if test == TestKind::Idp {
                c.determinate() as f64
            } else {
                runs
            };
            CellResult {
                delta,
                test,
                counts: c,
                accuracy: c.correct as f64 / runs,
                power: c.greater as f64 / runs,
                mean_loss: if loss_denom > 0.0 { loss_sum / loss_denom } else { 0.0 },
                indeterminacy: c.indeterminate as f64 / runs,
            }
        })
        .collect()
}

/// Runs the experiment, parallelizing across runs. The result depends only
/// on the spec (including its seed), not on thread or shard scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut cells = Vec::with_capacity(spec.delta_grid.len() * spec.tests.len());
    for (delta_idx, &delta) in spec.delta_grid.iter().enumerate() {
        let counts = (0..spec.runs)
            .into_par_iter()
            .try_fold(
                || zero_counts(spec),
                |acc, run| run_once(spec, delta_idx, run).map(|c| merge_counts(acc, c)),
            )
            .try_reduce(|| zero_counts(spec), |a, b| Ok(merge_counts(a, b)))?;
        cells.extend(cells_from_counts(spec, delta, counts));
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        cells,
    })
}

/// Runs the experiment with runs partitioned into `shards` contiguous
/// blocks, merging per-shard tallies in block order. Produces a result
/// identical to [`run_experiment`] for every shard count.
pub fn run_experiment_sharded(spec: &ExperimentSpec, shards: usize) -> Result<ExperimentResult> {
    spec.validate()?;
    if shards == 0 {
        return Err(Error::param("shards", "must be at least 1"));
    }
    let mut cells = Vec::with_capacity(spec.delta_grid.len() * spec.tests.len());
    for (delta_idx, &delta) in spec.delta_grid.iter().enumerate() {
        let bounds: Vec<(usize, usize)> = (0..shards)
            .map(|i| {
                let lo = i * spec.runs / shards;
                let hi = (i + 1) * spec.runs / shards;
                (lo, hi)
            })
            .collect();
        let shard_counts = bounds
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut acc = zero_counts(spec);
                for run in lo..hi {
                    acc = merge_counts(acc, run_once(spec, delta_idx, run)?);
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        let counts = shard_counts
            .into_iter()
            .fold(zero_counts(spec), merge_counts);
        cells.extend(cells_from_counts(spec, delta, counts));
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        cells,
    })
}

/// Serialization target of [`emit_tables`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Serializes an experiment: long-format CSV with one row per
/// (delta, test, metric), or JSON that round-trips the full result.
pub fn emit_tables(result: &ExperimentResult, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(result).expect("serializable result");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut out = String::from("delta,test,metric,value,runs,seed\n");
            let runs = result.spec.runs;
            let seed = result.spec.seed;
            for cell in &result.cells {
                let mut push = |metric: &str, value: String| {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        cell.delta, cell.test, metric, value, runs, seed
                    ));
                };
                push("accuracy", cell.accuracy.to_string());
                push("power", cell.power.to_string());
                push("mean_loss", cell.mean_loss.to_string());
                if cell.test == TestKind::Idp {
                    push("indeterminacy", cell.indeterminacy.to_string());
                }
                push("count_greater", cell.counts.greater.to_string());
                push("count_not_greater", cell.counts.not_greater.to_string());
                push("count_indeterminate", cell.counts.indeterminate.to_string());
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> ExperimentSpec {
        ExperimentSpec {
            delta_grid: vec![0.0],
            n1: 5,
            n2: 5,
            runs: 4,
            gamma: 0.05,
            k0: 1.0,
            k1: 19.0,
            s: crate::idp::DEFAULT_PRIOR_STRENGTH,
            mc_samples: 400,
            seed: 11,
            generator: Generator::GaussianShift,
            tests: vec![TestKind::Idp, TestKind::Mww, TestKind::BbDp, TestKind::FiftyFifty],
            approx: ApproxMode::MonteCarlo,
        }
    }

    #[test]
    fn loss_eval_cases() {
        assert_eq!(loss_eval(true, false, 1.0, 19.0), 1.0);
        assert_eq!(loss_eval(false, true, 1.0, 19.0), 19.0);
        assert_eq!(loss_eval(true, true, 5.0, 7.0), 0.0);
        assert_eq!(loss_eval(false, false, 5.0, 7.0), 0.0);
    }

    #[test]
    fn true_hypothesis_cases() {
        assert!(true_hypothesis(&Generator::GaussianShift, 1.0));
        assert!(!true_hypothesis(&Generator::GaussianShift, 0.0));
        assert!(!true_hypothesis(&Generator::GaussianShift, -0.3));
        assert!(!true_hypothesis(&Generator::GaussianScale { sigma2: 100.0 }, 0.0));
        assert!(true_hypothesis(&Generator::StudentTShift { df: 3.0 }, 0.2));
    }

    #[test]
    fn spec_validation_catches_inconsistent_gamma() {
        let mut spec = base_spec();
        spec.gamma = 0.10;
        let err = spec.validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "gamma", .. }));
    }

    #[test]
    fn spec_validation_catches_bad_generator() {
        let mut spec = base_spec();
        spec.generator = Generator::StudentTShift { df: 0.0 };
        assert!(spec.validate().is_err());
        spec.generator = Generator::GaussianScale { sigma2: -1.0 };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn spec_validation_rejects_duplicates_and_empty() {
        let mut spec = base_spec();
        spec.tests = vec![];
        assert!(spec.validate().is_err());
        spec.tests = vec![TestKind::Mww, TestKind::Mww];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn counts_partition_the_runs() {
        let result = run_experiment(&base_spec()).unwrap();
        for cell in &result.cells {
            let c = cell.counts;
            assert_eq!(c.greater + c.not_greater + c.indeterminate, 4);
            if cell.test != TestKind::Idp {
                assert_eq!(c.indeterminate, 0);
            }
            assert_eq!(
                c.correct + c.false_negatives + c.false_positives,
                c.determinate()
            );
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let spec = base_spec();
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_report_round_trips() {
        let result = run_experiment(&base_spec()).unwrap();
        let json = emit_tables(&result, ReportFormat::Json);
        let parsed: ExperimentResult = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, result);
    }

    #[test]
    fn csv_report_has_one_row_per_cell_metric() {
        let mut spec = base_spec();
        spec.tests = vec![TestKind::Idp];
        spec.runs = 2;
        let result = run_experiment(&spec).unwrap();
        let csv = emit_tables(&result, ReportFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "delta,test,metric,value,runs,seed");
        // one delta, one test: accuracy, power, mean_loss, indeterminacy + 3 counts
        assert_eq!(lines.len(), 1 + 7);
        let metrics: Vec<&str> = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(2).unwrap())
            .collect();
        let mut unique = metrics.clone();
        unique.dedup();
        assert_eq!(metrics, unique);
        assert!(lines[1..].iter().all(|l| l.starts_with("0,idp,")));
    }
}
