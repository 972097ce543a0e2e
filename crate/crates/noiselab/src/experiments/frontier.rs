//! Growth of truncated norms in the level cutoff `J` around the critical
//! smoothness.

use noiselab_core::besov::lq_norm;
use noiselab_core::fourier_besov::fb_norms_with;
use noiselab_core::partition::PartitionProfile;
use noiselab_core::stats::{self, linear_fit};
use noiselab_core::synthesis::{block_lp_norm, QuadratureOptions};
use noiselab_core::FbVariant;

use super::divergence::sup_growth;
use super::{cell, noise, num, par_trials, Assertion, ExperimentOutput, ExperimentSummary, FitReport, Table};
use crate::config::{ExperimentConfig, Exponent, Space};
use crate::error::Result;

#[derive(Clone, Copy, Debug)]
struct Series {
    variant: &'static str,
    fb: Option<FbVariant>,
    p: f64,
    s: f64,
}

fn variant_name(v: FbVariant) -> &'static str {
    match v {
        FbVariant::Sharp => "sharp",
        FbVariant::Smooth => "smooth",
        FbVariant::Dyadic => "dyadic",
    }
}

/// Per level `(block_norm, weighted)` for `j = 0..=jmax`, one entry per series.
fn trial_levels(cfg: &ExperimentConfig, space: Space, series: &[Series], trial: u64) -> Result<Vec<Vec<(f64, f64)>>> {
    let field = noise(cfg, cfg.d, cfg.cutoff, trial)?;
    let levels = cfg.jmax as usize + 1;
    let mut out = Vec::with_capacity(series.len());
    match space {
        Space::Besov => {
            let opts = QuadratureOptions { osf: cfg.osf, tol: cfg.quadrature_tol, ..QuadratureOptions::default() };
            let mut cache: Vec<(f64, Vec<f64>)> = Vec::new();
            for sr in series {
                if !cache.iter().any(|(p, _)| *p == sr.p) {
                    let blocks = (0..levels as u32)
                        .map(|j| block_lp_norm(&field, &cfg.partition, j, sr.p, &opts).map(|b| b.value))
                        .collect::<std::result::Result<Vec<_>, _>>()?;
                    cache.push((sr.p, blocks));
                }
                let blocks = &cache.iter().find(|(p, _)| *p == sr.p).expect("cached").1;
                out.push(blocks.iter().enumerate().map(|(j, b)| (*b, (sr.s * j as f64).exp2() * b)).collect());
            }
        }
        Space::FourierBesov => {
            let smooth = if cfg.partition.is_sharp() { PartitionProfile::smooth() } else { cfg.partition };
            for sr in series {
                let t = fb_norms_with(&field, sr.s, sr.p, 1.0, &smooth)?;
                let v = sr.fb.expect("fourier-besov series carry a variant");
                out.push(
                    t.per_level[..levels]
                        .iter()
                        .map(|l| {
                            let w = match v {
                                FbVariant::Sharp => l.sharp,
                                FbVariant::Smooth => l.smooth,
                                FbVariant::Dyadic => l.dyadic,
                            };
                            (l.shell_lp, w)
                        })
                        .collect(),
                );
            }
        }
    }
    Ok(out)
}

pub fn run_frontier(cfg: &ExperimentConfig, space: Space) -> Result<ExperimentOutput> {
    cfg.guard_field(cfg.d, cfg.cutoff)?;
    let tol = &cfg.tolerances;
    let mut series = Vec::new();
    let variants: Vec<(&'static str, Option<FbVariant>)> = match space {
        Space::Besov => vec![(if cfg.partition.is_sharp() { "sharp" } else { "smooth" }, None)],
        Space::FourierBesov => cfg.fb_variant.variants().into_iter().map(|v| (variant_name(v), Some(v))).collect(),
    };
    for &(variant, fb) in &variants {
        for p in &cfg.p_values {
            let crit = space.critical(cfg.d, p.get());
            let sweep: Vec<f64> = match &cfg.s_values {
                Some(v) => v.clone(),
                None => cfg.s_offsets.iter().map(|o| crit + o).collect(),
            };
            for s in sweep {
                series.push(Series { variant, fb, p: p.get(), s });
            }
        }
    }
    let per_trial = par_trials(cfg.trials, |t| trial_levels(cfg, space, &series, t))?;

    let mut summary = ExperimentSummary::new(cfg);
    let mut cells = Table::new(
        format!("frontier_{}", space.name()),
        &["variant", "p", "s", "q", "critical", "norm_slope", "norm_slope_se", "level_slope", "level_slope_se", "expected", "verdict"],
    );
    let mut tables = Vec::new();
    let js: Vec<u32> = (cfg.fit_min..=cfg.jmax).collect();
    let octaves = js.len() as u32;
    let mut growth_cache: Option<Assertion> = None;

    for (si, sr) in series.iter().enumerate() {
        let crit = space.critical(cfg.d, sr.p);
        let offset = sr.s - crit;
        let at_crit = offset.abs() < 1e-9;
        // mean over trials of log2 weighted level values
        let level_y: Vec<f64> = js
            .iter()
            .map(|&j| stats::mean(&per_trial.iter().map(|t| t[si][j as usize].1.log2()).collect::<Vec<_>>()))
            .collect();
        let xs: Vec<f64> = js.iter().map(|&j| j as f64).collect();
        let level_fit = linear_fit(&xs, &level_y);
        for q in &cfg.q_values {
            let q = q.get();
            let tag = format!("{}.{}.p{}.s{}.q{}", space.name(), sr.variant, Exponent(sr.p), num(sr.s), Exponent(q));
            let file = format!("frontier_{}_{}_p{}_s{}_q{}", space.name(), sr.variant, Exponent(sr.p), num(sr.s), Exponent(q));
            // norm_value[t][J]
            let norms: Vec<Vec<f64>> = per_trial
                .iter()
                .map(|t| (0..=cfg.jmax as usize).map(|jj| lq_norm(t[si][..=jj].iter().map(|l| l.1), q)).collect())
                .collect();
            let mut data = Table::new(file.clone(), &["J", "trial", "level_j", "block_norm", "weighted", "norm_value"]);
            let mut plot = Table::plot(format!("{file}_plot"));
            for &jj in &js {
                for (t, tr) in per_trial.iter().enumerate() {
                    for (lvl, (b, w)) in tr[si][..=jj as usize].iter().enumerate() {
                        data.push(vec![cell(jj), cell(t), cell(lvl), num(*b), num(*w), num(norms[t][jj as usize])]);
                    }
                }
                let col: Vec<f64> = norms.iter().map(|n| n[jj as usize]).collect();
                plot.push(super::plot_row(jj as f64, &col, tol.se_mult));
            }
            let mean_norm: Vec<f64> = (0..=cfg.jmax as usize)
                .map(|jj| stats::mean(&norms.iter().map(|n| n[jj]).collect::<Vec<_>>()))
                .collect();
            let norm_y: Vec<f64> = js.iter().map(|&j| mean_norm[j as usize].log2()).collect();
            let norm_fit = linear_fit(&xs, &norm_y);
            let expected_norm = if offset > 0.0 { offset } else { 0.0 };
            summary.fits.push(FitReport::new(format!("{tag}.norm"), norm_fit, expected_norm));
            summary.fits.push(FitReport::new(format!("{tag}.level"), level_fit, offset));

            let assertion = if octaves < cfg.min_octaves {
                Assertion::inconclusive(
                    format!("frontier.{tag}"),
                    format!("only {octaves} octaves in [{}, {}], need {}", cfg.fit_min, cfg.jmax, cfg.min_octaves),
                )
            } else if space == Space::Besov && sr.p < 2.0 {
                Assertion::inconclusive(
                    format!("frontier.{tag}.observed"),
                    "p < 2: almost sure lower bound unknown, slopes reported as observations only",
                )
            } else if at_crit && sr.p.is_infinite() {
                // sup of |gamma_k| grows without bound
                growth_cache
                    .get_or_insert_with(|| match sup_growth(cfg) {
                        Ok((a, _)) => a,
                        Err(e) => Assertion::inconclusive("sup_growth", e.to_string()),
                    })
                    .clone()
                    .renamed(format!("frontier.{tag}.divergent"))
            } else if at_crit && q.is_infinite() {
                Assertion::new(
                    format!("frontier.{tag}.plateau"),
                    norm_fit.slope.abs() <= tol.slope,
                    norm_fit.slope,
                    "0",
                    format!("+- {}", tol.slope),
                )
            } else if at_crit {
                let half = cfg.jmax / 2;
                let ratio = (mean_norm[2 * half as usize] / mean_norm[half as usize]).powf(q);
                Assertion::new(
                    format!("frontier.{tag}.growing"),
                    (tol.ratio_lo..=tol.ratio_hi).contains(&ratio),
                    ratio,
                    format!("(norm(J={})/norm(J={half}))^q in [{}, {}]", 2 * half, tol.ratio_lo, tol.ratio_hi),
                    "ratio band",
                )
            } else if sr.p.is_infinite() {
                // shell maxima carry a sqrt(log) factor, so only the trend is checked
                let ok = level_fit.slope.signum() == offset.signum();
                let kind = if offset > 0.0 { "growth" } else { "decay" };
                Assertion::new(
                    format!("frontier.{tag}.{kind}_trend"),
                    ok,
                    level_fit.slope,
                    format!("sign of {offset}"),
                    "sign only",
                )
                .with_detail(format!("norm slope {}, level slope {}", norm_fit.slope, level_fit.slope))
            } else if offset > 0.0 {
                // for q < inf the partial sums only approach the level slope geometrically
                let level_ok = (level_fit.slope - offset).abs() <= tol.slope;
                let ok = level_ok && (q.is_finite() || (norm_fit.slope - offset).abs() <= tol.slope);
                let observed = if q.is_infinite() { norm_fit.slope } else { level_fit.slope };
                Assertion::new(format!("frontier.{tag}.growth"), ok, observed, format!("{offset}"), format!("+- {}", tol.slope))
                    .with_detail(format!("norm slope {}, level slope {}", norm_fit.slope, level_fit.slope))
            } else {
                Assertion::new(
                    format!("frontier.{tag}.decay"),
                    (level_fit.slope - offset).abs() <= tol.slope,
                    level_fit.slope,
                    format!("{offset}"),
                    format!("+- {}", tol.slope),
                )
            };
            cells.push(vec![
                sr.variant.to_string(),
                Exponent(sr.p).to_string(),
                num(sr.s),
                Exponent(q).to_string(),
                num(crit),
                num(norm_fit.slope),
                num(norm_fit.slope_se),
                num(level_fit.slope),
                num(level_fit.slope_se),
                num(expected_norm),
                assertion.verdict.to_string(),
            ]);
            summary.assert(assertion);
            tables.push(data);
            tables.push(plot);
        }
    }
    tables.insert(0, cells);
    Ok(ExperimentOutput { summary: summary.finish(), tables })
}
