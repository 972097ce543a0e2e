//! Experiment configuration: TOML file keys, command-line overrides,
//! defaults and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use noiselab_core::partition::PartitionProfile;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{AppError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ExperimentKind {
    LlnBesov,
    LlnFb,
    Frontier,
    MeanIdentity,
    HvCheck,
    Tail,
    Divergence,
    Logsup,
    Equivalence,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::LlnBesov => "lln_besov",
            Self::LlnFb => "lln_fb",
            Self::Frontier => "frontier",
            Self::MeanIdentity => "mean_identity",
            Self::HvCheck => "hv_check",
            Self::Tail => "tail",
            Self::Divergence => "divergence",
            Self::Logsup => "logsup",
            Self::Equivalence => "equivalence",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Space {
    #[default]
    Besov,
    FourierBesov,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Besov => "besov",
            Space::FourierBesov => "fourier_besov",
        }
    }

    /// Smoothness at which membership switches.
    pub fn critical(self, d: usize, p: f64) -> f64 {
        match self {
            Space::Besov => -(d as f64) / 2.0,
            Space::FourierBesov => {
                if p.is_infinite() {
                    0.0
                } else {
                    -(d as f64) / p
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum VariantChoice {
    #[default]
    Sharp,
    Smooth,
    Dyadic,
    All,
}

impl VariantChoice {
    pub fn variants(self) -> Vec<noiselab_core::FbVariant> {
        use noiselab_core::FbVariant as V;
        match self {
            Self::Sharp => vec![V::Sharp],
            Self::Smooth => vec![V::Smooth],
            Self::Dyadic => vec![V::Dyadic],
            Self::All => vec![V::Sharp, V::Smooth, V::Dyadic],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PartitionChoice {
    #[default]
    Sharp,
    Smooth,
}

/// An exponent in `[1, inf]`; accepts numbers, TOML `inf`, or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const INF: Exponent = Exponent(f64::INFINITY);

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INF),
            t => t.parse::<f64>().map(Exponent).map_err(|e| format!("bad exponent {s:?}: {e}")),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(x) => Ok(Exponent(x)),
            Raw::Int(x) => Ok(Exponent(x as f64)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute tolerance on fitted log2 slopes.
    pub slope: f64,
    /// Relative tolerance of the Besov shell average against its limit.
    pub lln_besov: f64,
    pub lln_fb: f64,
    /// Standard-error multiplier for Monte Carlo comparisons.
    pub se_mult: f64,
    /// Required fraction of trials inside the LLN band.
    pub coverage: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    /// Minimal relative growth of the running maximum of `|gamma_k|` from N to 4N.
    pub growth_min: f64,
    pub logsup_max_growth: f64,
    pub corr_max: f64,
    pub level_lo: f64,
    pub level_hi: f64,
    /// Required fraction of strictly increasing running sups.
    pub increase_fraction: f64,
    /// Relative slack for exact inequalities.
    pub equiv_rel: f64,
    pub parseval_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slope: 0.05,
            lln_besov: 0.05,
            lln_fb: 0.10,
            se_mult: 3.0,
            coverage: 0.95,
            ratio_lo: 1.6,
            ratio_hi: 2.4,
            growth_min: 0.05,
            logsup_max_growth: 0.5,
            corr_max: 0.05,
            level_lo: 0.5,
            level_hi: 5.0,
            increase_fraction: 0.9,
            equiv_rel: 1e-12,
            parseval_rel: 1e-10,
        }
    }
}

/// Every key is optional; used both for the file and for flag overrides.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<ExperimentKind>,
    pub space: Option<Space>,
    pub d: Option<usize>,
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub s: Option<f64>,
    pub s_values: Option<Vec<f64>>,
    pub s_offsets: Option<Vec<f64>>,
    pub p_values: Option<Vec<Exponent>>,
    pub q_values: Option<Vec<Exponent>>,
    pub levels: Option<Vec<u32>>,
    pub jmax: Option<u32>,
    pub cutoff: Option<u32>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub partition: Option<PartitionChoice>,
    pub smooth_plateau: Option<f64>,
    pub smooth_support: Option<f64>,
    pub osf: Option<usize>,
    pub quadrature_tol: Option<f64>,
    pub fb_variant: Option<VariantChoice>,
    pub fit_min: Option<u32>,
    pub min_octaves: Option<u32>,
    pub max_coefficients: Option<usize>,
    pub growth_base_cutoff: Option<u32>,
    pub logsup_from: Option<u32>,
    pub logsup_to: Option<u32>,
    pub r_grid: Option<Vec<f64>>,
    pub equivalence_fields: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub tolerances: Option<Tolerances>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RawConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| AppError::Schema { what: "config".into(), msg: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(AppError::MissingConfig(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Keys set in `top` win.
    pub fn overlay(self, top: RawConfig) -> RawConfig {
        let base = self;
        overlay!(base, top; experiment, space, d, p, q, s, s_values, s_offsets, p_values, q_values, levels, jmax,
            cutoff, trials, seed, partition, smooth_plateau, smooth_support, osf, quadrature_tol,
            fb_variant, fit_min, min_octaves, max_coefficients, growth_base_cutoff, logsup_from,
            logsup_to, r_grid, equivalence_fields, out, threads, tolerances)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub space: Space,
    pub d: usize,
    pub p: Exponent,
    pub q: Exponent,
    pub s: f64,
    /// Absolute smoothness sweep; when absent the sweep is `critical(p) + s_offsets`.
    pub s_values: Option<Vec<f64>>,
    pub s_offsets: Vec<f64>,
    pub p_values: Vec<Exponent>,
    pub q_values: Vec<Exponent>,
    pub levels: Vec<u32>,
    pub jmax: u32,
    pub cutoff: u32,
    pub trials: usize,
    pub seed: u64,
    pub partition: PartitionProfile,
    pub osf: usize,
    pub quadrature_tol: f64,
    pub fb_variant: VariantChoice,
    pub fit_min: u32,
    pub min_octaves: u32,
    pub max_coefficients: usize,
    pub growth_base_cutoff: u32,
    pub logsup_from: u32,
    pub logsup_to: u32,
    pub r_grid: Option<Vec<f64>>,
    pub equivalence_fields: usize,
    pub tolerances: Tolerances,
    /// Runtime only, not part of the config hash.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

fn invalid(msg: impl Into<String>) -> AppError {
    AppError::Validation(msg.into())
}

fn check_exponent(name: &str, e: Exponent) -> Result<()> {
    let v = e.get();
    if v >= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {e} is outside [1, inf]")))
    }
}

impl ExperimentConfig {
    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let experiment = raw.experiment.ok_or_else(|| invalid("missing key `experiment`"))?;
        let d = raw.d.unwrap_or(1);
        if !(1..=noiselab_core::lattice::MAX_DIM).contains(&d) {
            return Err(invalid(format!("d = {d} must lie in 1..=4")));
        }
        let space = raw.space.unwrap_or_default();
        let p = raw.p.unwrap_or(Exponent(2.0));
        let q = raw.q.unwrap_or(Exponent::INF);
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        let p_values = raw.p_values.unwrap_or_else(|| match experiment {
            ExperimentKind::MeanIdentity => vec![Exponent(1.0), Exponent(2.0), Exponent(4.0)],
            ExperimentKind::Equivalence => vec![Exponent(1.0), Exponent(2.0), Exponent(4.0), Exponent::INF],
            _ => vec![p],
        });
        let q_values = raw.q_values.unwrap_or_else(|| match experiment {
            ExperimentKind::Equivalence => vec![Exponent(1.0), Exponent(2.0), Exponent::INF],
            _ => vec![Exponent::INF, Exponent(1.0)],
        });
        for &e in &p_values {
            check_exponent("p_values entry", e)?;
        }
        for &e in &q_values {
            check_exponent("q_values entry", e)?;
        }
        let jmax = raw.jmax.unwrap_or(12);
        if !(1..=29).contains(&jmax) {
            return Err(invalid(format!("jmax = {jmax} must lie in 1..=29")));
        }
        let min_cutoff = 1u64 << (jmax + 1);
        let cutoff = raw.cutoff.unwrap_or(min_cutoff as u32);
        if (cutoff as u64) < min_cutoff {
            return Err(invalid(format!(
                "cutoff N = {cutoff} is below 2^(jmax+1) = {min_cutoff}; levels up to jmax would be incomplete"
            )));
        }
        let s = raw.s.unwrap_or_else(|| space.critical(d, p.get()));
        if !s.is_finite() {
            return Err(invalid("s must be finite"));
        }
        let explicit_s = raw.s.is_some();
        let s_values = match (raw.s_values, experiment) {
            (None, ExperimentKind::Equivalence) => Some(vec![-1.0, -0.5, 0.0]),
            // a single explicit s narrows the frontier sweep
            (None, ExperimentKind::Frontier) if explicit_s => Some(vec![s]),
            (v, _) => v,
        };
        let s_offsets = raw.s_offsets.unwrap_or_else(|| vec![-0.25, 0.0, 0.25, 0.5]);
        if s_values.iter().flatten().chain(&s_offsets).any(|s| !s.is_finite()) {
            return Err(invalid("smoothness sweep entries must be finite"));
        }
        let levels = raw.levels.unwrap_or_else(|| (0..=jmax.min(8)).collect());
        if let Some(&j) = levels.iter().find(|&&j| j > jmax) {
            return Err(invalid(format!("level {j} exceeds jmax = {jmax}")));
        }
        let trials = raw.trials.unwrap_or(100);
        if trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        let partition = match raw.partition.unwrap_or_default() {
            PartitionChoice::Sharp => PartitionProfile::sharp(),
            PartitionChoice::Smooth => {
                let def = PartitionProfile::smooth();
                let PartitionProfile::Smooth { plateau, support } = def else { unreachable!() };
                PartitionProfile::smooth_with(raw.smooth_plateau.unwrap_or(plateau), raw.smooth_support.unwrap_or(support))
                    .map_err(|e| invalid(e.to_string()))?
            }
        };
        let osf = raw.osf.unwrap_or(4);
        if osf < 3 {
            return Err(invalid("osf must be at least 3"));
        }
        let quadrature_tol = raw.quadrature_tol.unwrap_or(1e-6);
        if !(quadrature_tol > 0.0) {
            return Err(invalid("quadrature_tol must be positive"));
        }
        let logsup_from = raw.logsup_from.unwrap_or(1 << 6);
        let logsup_to = raw.logsup_to.unwrap_or(1 << 14);
        if !(1 <= logsup_from && logsup_from < logsup_to) {
            return Err(invalid("need 1 <= logsup_from < logsup_to"));
        }
        let growth_base_cutoff = raw.growth_base_cutoff.unwrap_or(16);
        if growth_base_cutoff == 0 {
            return Err(invalid("growth_base_cutoff must be positive"));
        }
        if let Some(r) = &raw.r_grid {
            if r.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                return Err(invalid("r_grid entries must be positive"));
            }
        }
        let tolerances = raw.tolerances.unwrap_or_default();
        let t = &tolerances;
        let positive = [t.slope, t.lln_besov, t.lln_fb, t.se_mult, t.ratio_lo, t.growth_min, t.logsup_max_growth, t.corr_max, t.level_lo];
        if positive.iter().any(|x| !(*x > 0.0)) || t.ratio_hi <= t.ratio_lo || t.level_hi <= t.level_lo || t.equiv_rel < 0.0 || t.parseval_rel < 0.0 {
            return Err(invalid("tolerances must be positive with lo < hi"));
        }
        if !(0.0..=1.0).contains(&t.coverage) || !(0.0..=1.0).contains(&t.increase_fraction) {
            return Err(invalid("coverage fractions must lie in [0, 1]"));
        }
        if raw.threads == Some(0) {
            return Err(invalid("threads must be positive"));
        }
        Ok(ExperimentConfig {
            experiment,
            space,
            d,
            p,
            q,
            s,
            s_values,
            s_offsets,
            p_values,
            q_values,
            levels,
            jmax,
            cutoff,
            trials,
            seed: raw.seed.unwrap_or(0),
            partition,
            osf,
            quadrature_tol,
            fb_variant: raw.fb_variant.unwrap_or_default(),
            fit_min: raw.fit_min.unwrap_or(4),
            min_octaves: raw.min_octaves.unwrap_or(5),
            max_coefficients: raw.max_coefficients.unwrap_or(noiselab_core::randfield::DEFAULT_COEFFICIENT_BUDGET),
            growth_base_cutoff,
            logsup_from,
            logsup_to,
            r_grid: raw.r_grid,
            equivalence_fields: raw.equivalence_fields.unwrap_or(100),
            tolerances,
            out: raw.out,
            threads: raw.threads,
        })
    }

    /// Minimal config for an experiment with every other key defaulted.
    pub fn for_experiment(experiment: ExperimentKind) -> Self {
        Self::resolve(RawConfig { experiment: Some(experiment), ..RawConfig::default() }).expect("defaults are valid")
    }

    /// Canonical JSON of the hashed part of the config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Spectral side length needed for a field of cutoff `n`, checked against the budget.
    pub fn guard_field(&self, d: usize, n: u32) -> Result<()> {
        let side = 2 * n as u128 + 1;
        let total = side.pow(d as u32);
        if total > self.max_coefficients as u128 {
            return Err(AppError::Resource(format!(
                "a field with d = {d}, N = {n} needs {total} coefficients, over max_coefficients = {}",
                self.max_coefficients
            )));
        }
        Ok(())
    }
}
