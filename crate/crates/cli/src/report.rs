use serde::Serialize;

use idp_core::{ApproxMode, Decision, TieMode};

/// The `test` subcommand report. Text, JSON and CSV renderings carry
/// exactly these fields with full-precision values.
#[derive(Serialize)]
pub struct TestReport {
    pub outcome: String,
    pub n1: usize,
    pub n2: usize,
    pub u_statistic: f64,
    pub lower_mean: f64,
    pub upper_mean: f64,
    pub lower_var: f64,
    pub upper_var: f64,
    pub lower_prob: f64,
    pub upper_prob: f64,
    pub lower_prob_se: f64,
    pub upper_prob_se: f64,
    pub s: f64,
    pub gamma: f64,
    pub c: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub ties: String,
    pub approx: String,
}

impl TestReport {
    pub fn new(decision: &Decision, n1: usize, n2: usize, u_statistic: f64) -> Self {
        let b = decision.bounds;
        let cfg = decision.config;
        TestReport {
            outcome: decision.outcome.to_string(),
            n1,
            n2,
            u_statistic,
            lower_mean: b.lower_mean,
            upper_mean: b.upper_mean,
            lower_var: b.lower_var,
            upper_var: b.upper_var,
            lower_prob: b.lower_prob,
            upper_prob: b.upper_prob,
            lower_prob_se: b.lower_prob_se,
            upper_prob_se: b.upper_prob_se,
            s: cfg.s,
            gamma: cfg.gamma,
            c: cfg.c,
            mc_samples: cfg.mc_samples,
            seed: cfg.seed,
            ties: match cfg.ties {
                TieMode::Strict => "strict".into(),
                TieMode::Midrank => "midrank".into(),
            },
            approx: match cfg.approx {
                ApproxMode::MonteCarlo => "mc".into(),
                ApproxMode::Normal => "normal".into(),
            },
        }
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("outcome", self.outcome.clone()),
            ("n1", self.n1.to_string()),
            ("n2", self.n2.to_string()),
            ("u_statistic", self.u_statistic.to_string()),
            ("lower_mean", self.lower_mean.to_string()),
            ("upper_mean", self.upper_mean.to_string()),
            ("lower_var", self.lower_var.to_string()),
            ("upper_var", self.upper_var.to_string()),
            ("lower_prob", self.lower_prob.to_string()),
            ("upper_prob", self.upper_prob.to_string()),
            ("lower_prob_se", self.lower_prob_se.to_string()),
            ("upper_prob_se", self.upper_prob_se.to_string()),
            ("s", self.s.to_string()),
            ("gamma", self.gamma.to_string()),
            ("c", self.c.to_string()),
            ("mc_samples", self.mc_samples.to_string()),
            ("seed", self.seed.to_string()),
            ("ties", self.ties.clone()),
            ("approx", self.approx.clone()),
        ]
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (name, value) in self.fields() {
            out.push_str(&format!("{name}: {value}\n"));
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let fields = self.fields();
        let header: Vec<&str> = fields.iter().map(|(n, _)| *n).collect();
        let row: Vec<String> = fields.into_iter().map(|(_, v)| v).collect();
        format!("{}\n{}\n", header.join(","), row.join(","))
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }
}
