//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use noiselab_core::besov::{besov_norm, BesovParams};
use noiselab_core::fourier_besov::fb_norms_with;
use noiselab_core::lattice::Dim;
use noiselab_core::partition::PartitionProfile;
use noiselab_core::randfield::{sample_white_noise, NoiseOptions, RngSpec};

use crate::config::{ExperimentConfig, ExperimentKind, Exponent, PartitionChoice, RawConfig, Space, VariantChoice};
use crate::error::{AppError, Result};
use crate::experiments::{self, ExperimentSummary};
use crate::{field_io, output};

#[derive(Debug, Parser)]
#[command(name = "noiselab", version, about = "Regularity experiments for truncated white noise on the torus")]
pub struct Cli {
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output root; defaults to $NOISELAB_OUT, then ./out.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML config file; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write CSVs plus a manifest.
    Run(RunArgs),
    /// Norm of a field file, as JSON on stdout.
    Norm(NormArgs),
    /// Write a white-noise field file.
    Sample(SampleArgs),
    /// Re-check and summarise an output directory.
    Report { dir: PathBuf },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub experiment: Option<ExperimentKind>,
    #[arg(long, value_enum)]
    pub space: Option<Space>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<Exponent>,
    #[arg(long)]
    pub q: Option<Exponent>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long)]
    pub jmax: Option<u32>,
    #[arg(long)]
    pub cutoff: Option<u32>,
    #[arg(long, value_enum)]
    pub partition: Option<PartitionChoice>,
    #[arg(long, value_enum)]
    pub fb_variant: Option<VariantChoice>,
    #[arg(long)]
    pub osf: Option<usize>,
    #[arg(long)]
    pub quadrature_tol: Option<f64>,
    #[arg(long)]
    pub fit_min: Option<u32>,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long)]
    pub p: Exponent,
    #[arg(long, default_value = "inf")]
    pub q: Exponent,
    #[arg(long, value_enum, default_value = "besov")]
    pub space: Space,
    #[arg(long, value_enum, default_value = "sharp")]
    pub partition: PartitionChoice,
    #[arg(long, default_value_t = 4)]
    pub osf: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub quadrature_tol: f64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub cutoff: u32,
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Hermitian (real-valued) noise.
    #[arg(long)]
    pub real: bool,
    /// Defaults to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Exit code of a finished command.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Run(ref a) => {
            let file = match &cli.config {
                Some(p) => RawConfig::load(p)?,
                None => RawConfig::default(),
            };
            let flags = RawConfig {
                experiment: a.experiment,
                space: a.space,
                d: a.d,
                p: a.p,
                q: a.q,
                s: a.s,
                jmax: a.jmax,
                cutoff: a.cutoff,
                partition: a.partition,
                fb_variant: a.fb_variant,
                osf: a.osf,
                quadrature_tol: a.quadrature_tol,
                fit_min: a.fit_min,
                seed: cli.seed,
                trials: cli.trials,
                out: cli.out.clone(),
                threads: cli.threads,
                ..RawConfig::default()
            };
            let cfg = ExperimentConfig::resolve(file.overlay(flags))?;
            let started = chrono::Utc::now();
            let result = experiments::run_with_threads(&cfg)?;
            let root = output::output_root(cfg.out.as_deref());
            let (dir, manifest) = output::write_run(&cfg, &result, &root, started)?;
            print_summary(stdout, &result.summary)?;
            writeln!(stdout, "output: {}", dir.display()).map_err(|e| AppError::io("<stdout>", e))?;
            Ok(manifest.verdict.exit_code())
        }
        Command::Norm(a) => {
            let field = field_io::read(&a.input, noiselab_core::randfield::DEFAULT_COEFFICIENT_BUDGET)?;
            let json = norm_json(&field, &a)?;
            writeln!(stdout, "{json}").map_err(|e| AppError::io("<stdout>", e))?;
            Ok(0)
        }
        Command::Sample(a) => {
            let dim = Dim::new(a.d).map_err(|e| AppError::Validation(e.to_string()))?;
            let opts = NoiseOptions { real: a.real, ..NoiseOptions::default() };
            let f = sample_white_noise(dim, a.cutoff, RngSpec { seed: cli.seed.unwrap_or(0) }, a.trial, opts).map_err(|e| match e {
                noiselab_core::Error::Budget { .. } => AppError::Resource(e.to_string()),
                e => e.into(),
            })?;
            let json = field_io::to_json(&f);
            match a.output {
                Some(p) => output::atomic_write(&p, json.as_bytes())?,
                None => writeln!(stdout, "{json}").map_err(|e| AppError::io("<stdout>", e))?,
            }
            Ok(0)
        }
        Command::Report { dir } => {
            let m = output::verify(&dir)?;
            writeln!(stdout, "{} ({} files verified), seed {}, config {}", m.experiment, m.files.len(), m.seed, &m.config_hash[..8])
                .map_err(|e| AppError::io("<stdout>", e))?;
            for a in &m.assertions {
                writeln!(stdout, "{:<12} {} observed={} expected={}", a.verdict.to_string(), a.id, a.observed, a.expected)
                    .map_err(|e| AppError::io("<stdout>", e))?;
            }
            writeln!(stdout, "verdict: {}", m.verdict).map_err(|e| AppError::io("<stdout>", e))?;
            Ok(m.verdict.exit_code())
        }
    }
}

fn norm_json(field: &noiselab_core::SpectralField, a: &NormArgs) -> Result<String> {
    let profile = match a.partition {
        PartitionChoice::Sharp => PartitionProfile::sharp(),
        PartitionChoice::Smooth => PartitionProfile::smooth(),
    };
    let text = match a.space {
        Space::Besov => {
            let params = BesovParams { osf: a.osf, quadrature_tol: a.quadrature_tol, ..BesovParams::new(a.s, a.p.get(), a.q.get()).with_profile(profile) };
            serde_json::to_string_pretty(&besov_norm(field, &params)?)
        }
        Space::FourierBesov => {
            let smooth = if profile.is_sharp() { PartitionProfile::smooth() } else { profile };
            serde_json::to_string_pretty(&fb_norms_with(field, a.s, a.p.get(), a.q.get(), &smooth)?)
        }
    };
    Ok(text.expect("report serializes"))
}

pub fn print_summary(out: &mut dyn Write, s: &ExperimentSummary) -> Result<()> {
    let io = |e| AppError::io("<stdout>", e);
    writeln!(out, "{} seed={} trials={} config={}", s.experiment, s.seed, s.trials, &s.config_hash[..8]).map_err(io)?;
    for a in &s.assertions {
        writeln!(out, "{:<12} {} observed={} expected={} tol={}", a.verdict.to_string(), a.id, a.observed, a.expected, a.tolerance).map_err(io)?;
        if !a.detail.is_empty() {
            writeln!(out, "             {}", a.detail).map_err(io)?;
        }
    }
    for o in &s.observations {
        writeln!(out, "  note {} = {}", o.label, o.value).map_err(io)?;
    }
    writeln!(out, "verdict: {}", s.verdict).map_err(io)?;
    Ok(())
}
