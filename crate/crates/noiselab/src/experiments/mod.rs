//! Monte Carlo drivers. Each returns a summary with verdicts plus the CSV
//! tables to persist.

use std::fmt;

use noiselab_core::lattice::Dim;
use noiselab_core::randfield::{sample_white_noise, NoiseOptions, RngSpec};
use noiselab_core::stats::{self, LinearFit};
use noiselab_core::SpectralField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{AppError, Result};

pub mod divergence;
pub mod equivalence;
pub mod frontier;
pub mod hv_check;
pub mod lln;
pub mod logsup;
pub mod mean_identity;
pub mod tail;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Fail dominates, then inconclusive. No assertions at all is inconclusive.
    pub fn combine<'a>(it: impl IntoIterator<Item = &'a Verdict>) -> Verdict {
        let mut any = false;
        let mut inconclusive = false;
        for v in it {
            any = true;
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => inconclusive = true,
                Verdict::Pass => {}
            }
        }
        if inconclusive || !any {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 3,
        }
    }

    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub id: String,
    pub verdict: Verdict,
    pub observed: f64,
    /// Human readable target, e.g. `1.4142 +- 5%`.
    pub expected: String,
    pub tolerance: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Assertion {
    pub fn new(id: impl Into<String>, ok: bool, observed: f64, expected: impl Into<String>, tolerance: impl Into<String>) -> Self {
        Assertion {
            id: id.into(),
            verdict: Verdict::from_bool(ok),
            observed,
            expected: expected.into(),
            tolerance: tolerance.into(),
            detail: String::new(),
        }
    }

    pub fn inconclusive(id: impl Into<String>, why: impl Into<String>) -> Self {
        Assertion {
            id: id.into(),
            verdict: Verdict::Inconclusive,
            observed: f64::NAN,
            expected: String::new(),
            tolerance: String::new(),
            detail: why.into(),
        }
    }

    pub fn renamed(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    pub label: String,
    pub level: u32,
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub label: String,
    pub slope: f64,
    pub slope_se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub expected: f64,
}

impl FitReport {
    pub fn new(label: impl Into<String>, fit: LinearFit, expected: f64) -> Self {
        FitReport {
            label: label.into(),
            slope: fit.slope,
            slope_se: fit.slope_se,
            ci_lo: fit.slope - 1.96 * fit.slope_se,
            ci_hi: fit.slope + 1.96 * fit.slope_se,
            expected,
        }
    }
}

/// Reported alongside verdicts, never asserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub seed: u64,
    pub config_hash: String,
    pub trials: usize,
    pub levels: Vec<LevelStat>,
    pub median: Option<f64>,
    pub quantiles: Vec<(f64, f64)>,
    pub fits: Vec<FitReport>,
    pub assertions: Vec<Assertion>,
    pub observations: Vec<Observation>,
    pub verdict: Verdict,
}

impl ExperimentSummary {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        ExperimentSummary {
            experiment: cfg.experiment.name().into(),
            seed: cfg.seed,
            config_hash: cfg.hash(),
            trials: cfg.trials,
            levels: Vec::new(),
            median: None,
            quantiles: Vec::new(),
            fits: Vec::new(),
            assertions: Vec::new(),
            observations: Vec::new(),
            verdict: Verdict::Inconclusive,
        }
    }

    pub fn observe(&mut self, label: impl Into<String>, value: f64) {
        self.observations.push(Observation { label: label.into(), value });
    }

    pub fn assert(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn level(&mut self, label: impl Into<String>, level: u32, xs: &[f64]) -> (f64, f64) {
        let (mean, se) = (stats::mean(xs), stats::std_err(xs));
        self.levels.push(LevelStat { label: label.into(), level, mean, std_err: se, n: xs.len() });
        (mean, se)
    }

    pub fn finish(mut self) -> Self {
        self.verdict = Verdict::combine(self.assertions.iter().map(|a| &a.verdict));
        self
    }
}

/// A CSV table; cells are preformatted so output is byte-stable.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Plot-ready columns `x, y, y_lo, y_hi`.
    pub fn plot(name: impl Into<String>) -> Self {
        Self::new(name, &["x", "y", "y_lo", "y_hi"])
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Shortest round-trip formatting; `inf` and `nan` spelled out.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn cell(x: impl fmt::Display) -> String {
    x.to_string()
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub summary: ExperimentSummary,
    pub tables: Vec<Table>,
}

/// Runs `f` for trials `0..n` in parallel; results come back in trial order.
pub fn par_trials<T: Send>(n: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n as u64).into_par_iter().map(f).collect()
}

pub fn noise(cfg: &ExperimentConfig, d: usize, cutoff: u32, trial: u64) -> Result<SpectralField> {
    let dim = Dim::new(d).map_err(|e| AppError::Validation(e.to_string()))?;
    let opts = NoiseOptions { budget: cfg.max_coefficients, ..NoiseOptions::default() };
    sample_white_noise(dim, cutoff, RngSpec { seed: cfg.seed }, trial, opts).map_err(|e| match e {
        noiselab_core::Error::Budget { .. } => AppError::Resource(e.to_string()),
        e => e.into(),
    })
}

/// `mean +- k se` as a plot row.
pub fn plot_row(x: f64, xs: &[f64], k: f64) -> Vec<String> {
    let (m, se) = (stats::mean(xs), stats::std_err(xs));
    let se = if se.is_finite() { se } else { 0.0 };
    vec![num(x), num(m), num(m - k * se), num(m + k * se)]
}

pub fn column(rows: &[Vec<f64>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i]).collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.experiment {
        ExperimentKind::LlnBesov => lln::run_lln_besov(cfg),
        ExperimentKind::LlnFb => lln::run_lln_fb(cfg),
        ExperimentKind::Frontier => frontier::run_frontier(cfg, cfg.space),
        ExperimentKind::MeanIdentity => mean_identity::run_mean_identity(cfg),
        ExperimentKind::HvCheck => hv_check::run_hv_check(cfg),
        ExperimentKind::Tail => tail::run_tail(cfg, cfg.space),
        ExperimentKind::Divergence => divergence::run_divergence_checks(cfg),
        ExperimentKind::Logsup => logsup::run_logsup(cfg),
        ExperimentKind::Equivalence => equivalence::run_equivalence(cfg),
    }
}

/// Runs inside a pool of `cfg.threads` workers when set.
pub fn run_with_threads(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| AppError::Resource(e.to_string()))?
            .install(|| run(cfg)),
        None => run(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_combine() {
        use Verdict::*;
        assert_eq!(Verdict::combine(&[Pass, Pass]), Pass);
        assert_eq!(Verdict::combine(&[Pass, Inconclusive]), Inconclusive);
        assert_eq!(Verdict::combine(&[Inconclusive, Fail]), Fail);
        assert_eq!(Verdict::combine(&[]), Inconclusive);
    }

    #[test]
    fn csv_is_stable() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![num(0.1), num(f64::INFINITY)]);
        assert_eq!(String::from_utf8(t.to_csv()).unwrap(), "a,b\n0.1,inf\n");
    }

    #[test]
    fn trials_keep_order() {
        let v = par_trials(100, |t| Ok(t * 2)).unwrap();
        assert_eq!(v, (0..100).map(|t| t * 2).collect::<Vec<_>>());
    }
}
