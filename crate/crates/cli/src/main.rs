//! Command-line front end: run the IDP rank-sum test on data files, run
//! simulation experiments, and dump posterior draws for plotting.
//!
//! Exit codes for `test` encode the three-way decision so scripts can
//! branch on it: 0 = greater, 1 = not greater, 2 = indeterminate.
//! Unreadable or ill-formed data files exit with 64, invalid parameters
//! with 65.

mod data;
mod report;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use idp_core::{
    choose_s, emit_tables, idp_decide, posterior_samples, run_experiment, u_statistic, ApproxMode,
    ExperimentSpec, Generator, Outcome, ReportFormat, TestConfig, TestKind, TieMode,
    DEFAULT_PRIOR_STRENGTH,
};

pub const EXIT_DATA: i32 = 64;
pub const EXIT_PARAMS: i32 = 65;

/// Terminal failure with the exit code it maps to.
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn params(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARAMS,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "idp",
    version,
    about = "IDP rank-sum test for P(X <= Y): lower/upper posterior inference, baselines, and simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the IDP rank-sum test on two data files (one number per line)
    Test(TestArgs),
    /// Run a seeded Monte Carlo experiment over a grid of location shifts
    Simulate(Box<SimulateArgs>),
    /// Write paired posterior draws (g_low, g_up) as CSV for plotting
    Posterior(PosteriorArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TiesArg {
    Strict,
    Midrank,
}

impl From<TiesArg> for TieMode {
    fn from(t: TiesArg) -> TieMode {
        match t {
            TiesArg::Strict => TieMode::Strict,
            TiesArg::Midrank => TieMode::Midrank,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ApproxArg {
    /// Monte Carlo over posterior weight draws
    Mc,
    /// Gaussian approximation from the closed-form moments
    Normal,
}

impl From<ApproxArg> for ApproxMode {
    fn from(a: ApproxArg) -> ApproxMode {
        match a {
            ApproxArg::Mc => ApproxMode::MonteCarlo,
            ApproxArg::Normal => ApproxMode::Normal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TestFormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormatArg {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct TestArgs {
    /// File with the x-population observations
    #[arg(long)]
    x: PathBuf,
    /// File with the y-population observations
    #[arg(long)]
    y: PathBuf,
    /// Prior strength s >= 0
    #[arg(long, conflicts_with = "rho")]
    s: Option<f64>,
    /// Choose s from the target posterior interval width after one
    /// observation pair (in (0,1))
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    /// Hypothesis threshold: tests P(X <= Y) > c
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    #[arg(long = "mc-samples", default_value_t = 20_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TiesArg::Midrank)]
    ties: TiesArg,
    #[arg(long, value_enum, default_value_t = ApproxArg::Mc)]
    approx: ApproxArg,
    #[arg(long, value_enum, default_value_t = TestFormatArg::Text)]
    format: TestFormatArg,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long = "delta-min", default_value_t = 0.0, allow_hyphen_values = true)]
    delta_min: f64,
    #[arg(long = "delta-max", default_value_t = 0.0, allow_hyphen_values = true)]
    delta_max: f64,
    /// Number of grid points between delta-min and delta-max (inclusive)
    #[arg(long, default_value_t = 1)]
    steps: usize,
    #[arg(long, default_value_t = 10)]
    n1: usize,
    #[arg(long, default_value_t = 10)]
    n2: usize,
    /// Monte Carlo repetitions per grid point
    #[arg(long, default_value_t = 2_000)]
    runs: usize,
    /// Loss ratio K0/(K0+K1); derived from --k0/--k1 when omitted
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, requires = "k1")]
    k0: Option<f64>,
    #[arg(long, requires = "k0")]
    k1: Option<f64>,
    /// Comma-separated subset of idp,mww,bbdp,fifty-fifty
    #[arg(long, default_value = "idp,mww,fifty-fifty")]
    tests: String,
    /// gaussian-shift, student-t:<df> or gaussian-scale:<sigma2>
    #[arg(long, default_value = "gaussian-shift")]
    generator: String,
    #[arg(long, conflicts_with = "rho")]
    s: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "mc-samples", default_value_t = 20_000)]
    mc_samples: usize,
    #[arg(long, value_enum, default_value_t = ApproxArg::Mc)]
    approx: ApproxArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TableFormatArg::Csv)]
    format: TableFormatArg,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct PosteriorArgs {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, conflicts_with = "rho")]
    s: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "mc-samples", default_value_t = 20_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TiesArg::Midrank)]
    ties: TiesArg,
    /// Output CSV path (columns g_low,g_up; one row per draw)
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_PARAMS,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(*args),
        Command::Posterior(args) => cmd_posterior(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn resolve_strength(s: Option<f64>, rho: Option<f64>) -> Result<f64, CliError> {
    match (s, rho) {
        (Some(s), None) => Ok(s),
        (None, Some(rho)) => choose_s(rho).map_err(|e| CliError::params(e.to_string())),
        (None, None) => Ok(DEFAULT_PRIOR_STRENGTH),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    }
}

fn cmd_test(args: TestArgs) -> Result<i32, CliError> {
    let s = resolve_strength(args.s, args.rho)?;
    let config = TestConfig {
        s,
        gamma: args.gamma,
        c: args.c,
        mc_samples: args.mc_samples,
        seed: args.seed,
        ties: args.ties.into(),
        approx: args.approx.into(),
    };
    config.validate().map_err(|e| CliError::params(e.to_string()))?;
    let x = data::read_sample(&args.x)?;
    let y = data::read_sample(&args.y)?;
    let decision = idp_decide(&x, &y, &config).map_err(|e| CliError::params(e.to_string()))?;
    let u = u_statistic(&x, &y, config.ties);
    let report = report::TestReport::new(&decision, x.len(), y.len(), u);
    let rendered = match args.format {
        TestFormatArg::Text => report.render_text(),
        TestFormatArg::Json => report.render_json(),
        TestFormatArg::Csv => report.render_csv(),
    };
    print!("{rendered}");
    Ok(match decision.outcome {
        Outcome::Greater => 0,
        Outcome::NotGreater => 1,
        Outcome::Indeterminate => 2,
    })
}

fn parse_generator(text: &str) -> Result<Generator, CliError> {
    if text == "gaussian-shift" {
        return Ok(Generator::GaussianShift);
    }
    if let Some(df) = text.strip_prefix("student-t:") {
        let df: f64 = df
            .parse()
            .map_err(|_| CliError::params(format!("invalid degrees of freedom `{df}`")))?;
        return Ok(Generator::StudentTShift { df });
    }
    if let Some(sigma2) = text.strip_prefix("gaussian-scale:") {
        let sigma2: f64 = sigma2
            .parse()
            .map_err(|_| CliError::params(format!("invalid variance `{sigma2}`")))?;
        return Ok(Generator::GaussianScale { sigma2 });
    }
    Err(CliError::params(format!(
        "unknown generator `{text}` (expected gaussian-shift, student-t:<df> or gaussian-scale:<sigma2>)"
    )))
}

fn parse_tests(text: &str) -> Result<Vec<TestKind>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|e: idp_core::Error| CliError::params(e.to_string())))
        .collect()
}

fn resolve_loss(
    gamma: Option<f64>,
    k0: Option<f64>,
    k1: Option<f64>,
) -> Result<(f64, f64, f64), CliError> {
    match (gamma, k0, k1) {
        (None, None, None) => Ok((0.05, 0.05, 0.95)),
        (Some(g), None, None) => Ok((g, g, 1.0 - g)),
        (None, Some(k0), Some(k1)) => {
            if k0 + k1 <= 0.0 {
                return Err(CliError::params("K0 + K1 must be positive"));
            }
            Ok((k0 / (k0 + k1), k0, k1))
        }
        (Some(g), Some(k0), Some(k1)) => {
            let implied = k0 / (k0 + k1);
            if (g - implied).abs() >= 1e-12 {
                return Err(CliError::params(format!(
                    "gamma = {g} inconsistent with K0/(K0+K1) = {implied}"
                )));
            }
            Ok((g, k0, k1))
        }
        // clap `requires` makes a lone --k0/--k1 unrepresentable
        _ => unreachable!(),
    }
}

fn delta_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError::params("--steps must be at least 1"));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    if !(min <= max) {
        return Err(CliError::params(format!(
            "--delta-min {min} must not exceed --delta-max {max}"
        )));
    }
    let width = (max - min) / (steps - 1) as f64;
    Ok((0..steps).map(|i| min + i as f64 * width).collect())
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32, CliError> {
    let (gamma, k0, k1) = resolve_loss(args.gamma, args.k0, args.k1)?;
    let spec = ExperimentSpec {
        delta_grid: delta_grid(args.delta_min, args.delta_max, args.steps)?,
        n1: args.n1,
        n2: args.n2,
        runs: args.runs,
        gamma,
        k0,
        k1,
        s: resolve_strength(args.s, args.rho)?,
        mc_samples: args.mc_samples,
        seed: args.seed,
        generator: parse_generator(&args.generator)?,
        tests: parse_tests(&args.tests)?,
        approx: args.approx.into(),
    };
    let result = run_experiment(&spec).map_err(|e| CliError::params(e.to_string()))?;
    let rendered = emit_tables(
        &result,
        match args.format {
            TableFormatArg::Csv => ReportFormat::Csv,
            TableFormatArg::Json => ReportFormat::Json,
        },
    );
    match args.out {
        Some(path) => fs::write(&path, rendered)
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{rendered}"),
    }
    Ok(0)
}

fn cmd_posterior(args: PosteriorArgs) -> Result<i32, CliError> {
    let config = TestConfig {
        s: resolve_strength(args.s, args.rho)?,
        mc_samples: args.mc_samples,
        seed: args.seed,
        ties: args.ties.into(),
        ..TestConfig::default()
    };
    config.validate().map_err(|e| CliError::params(e.to_string()))?;
    let x = data::read_sample(&args.x)?;
    let y = data::read_sample(&args.y)?;
    let (lows, ups) =
        posterior_samples(&x, &y, &config).map_err(|e| CliError::params(e.to_string()))?;
    let mut out = String::with_capacity(lows.len() * 40 + 16);
    out.push_str("g_low,g_up\n");
    for (l, u) in lows.iter().zip(&ups) {
        out.push_str(&format!("{l},{u}\n"));
    }
    fs::write(&args.out, out)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(0)
}
