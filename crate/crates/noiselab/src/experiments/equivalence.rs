//! Exact inequalities between the Fourier-Besov variants, the levelwise
//! bracket against Besov at `p = 2`, and a Hausdorff-Young trend check.

use std::f64::consts::TAU;

use noiselab_core::besov::{besov_norm, lq_norm, BesovParams};
use noiselab_core::fourier_besov::{dyadic_bracket, fb_norms_with, FbLevel};
use noiselab_core::lattice::{Dim, FreqIndex};
use noiselab_core::partition::PartitionProfile;
use noiselab_core::stats::{self, linear_fit};
use noiselab_core::synthesis::l2_norm_parseval;
use noiselab_core::{Complex64, SpectralField};

use super::{cell, noise, num, par_trials, Assertion, ExperimentOutput, ExperimentSummary, FitReport, Table};
use crate::config::{ExperimentConfig, Exponent};
use crate::error::{AppError, Result};

/// Deterministic test fields; `None` past the end of the list.
fn pattern(i: usize, dim: Dim, n: u32) -> Result<Option<SpectralField>> {
    let d = dim.get();
    let one = Complex64::new(1.0, 0.0);
    let axis = |r: i64| {
        let mut k = vec![0i64; d];
        k[0] = r;
        FreqIndex::new(&k)
    };
    let mut f = SpectralField::zeros(dim, n)?;
    let top = n as i64;
    match i {
        0 => f.set(&FreqIndex::zero(dim), one)?,
        1 => f.set(&axis(3)?, one)?,
        2 => f.set(&axis((top / 2).max(1))?, Complex64::new(0.0, -2.5))?,
        3 => f.set(&axis(top)?, one)?,
        4..=7 => {
            let a = [0.0, 0.5, 1.0, 2.0][i - 4];
            for (k, _) in f.clone().iter() {
                f.set(&k, one * (k.norm() + 1.0).powf(-a))?;
            }
        }
        8 => {
            for (k, _) in f.clone().iter() {
                let sign = if k.components().iter().sum::<i64>() % 2 == 0 { 1.0 } else { -1.0 };
                f.set(&k, one * sign)?;
            }
        }
        9 => {
            // a single dyadic shell
            let r2 = (n as u64 * n as u64) / 4;
            for (k, _) in f.clone().iter() {
                if k.norm_sq() > r2 {
                    f.set(&k, one)?;
                }
            }
        }
        _ => return Ok(None),
    }
    Ok(Some(f))
}

fn variant_values(levels: &[FbLevel], q: f64) -> (f64, f64, f64) {
    (
        lq_norm(levels.iter().map(|l| l.sharp), q),
        lq_norm(levels.iter().map(|l| l.smooth), q),
        lq_norm(levels.iter().map(|l| l.dyadic), q),
    )
}

pub fn run_equivalence(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let d = cfg.d;
    let dim = Dim::new(d).map_err(|e| AppError::Validation(e.to_string()))?;
    cfg.guard_field(d, cfg.cutoff)?;
    let s_grid: Vec<f64> = cfg.s_values.clone().unwrap_or_else(|| vec![-1.0, -0.5, 0.0]);
    let p_grid: Vec<f64> = cfg.p_values.iter().map(|p| p.get()).collect();
    let q_grid: Vec<f64> = cfg.q_values.iter().map(|q| q.get()).collect();
    let smooth = if cfg.partition.is_sharp() { PartitionProfile::smooth() } else { cfg.partition };
    let tol = &cfg.tolerances;
    let rel = 1.0 + tol.equiv_rel;

    struct Row {
        s: f64,
        p: f64,
        q: f64,
        v: (f64, f64, f64),
    }
    // per field: grid rows plus the worst p = 2 levelwise ratio range
    let per_field = par_trials(cfg.equivalence_fields, |i| {
        let f = match pattern(i as usize, dim, cfg.cutoff)? {
            Some(f) => f,
            None => noise(cfg, d, cfg.cutoff, i)?,
        };
        let mut rows = Vec::new();
        let mut p2 = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
        for &s in &s_grid {
            for &p in &p_grid {
                let t = fb_norms_with(&f, s, p, 1.0, &smooth)?;
                for &q in &q_grid {
                    rows.push(Row { s, p, q, v: variant_values(&t.per_level, q) });
                }
                if p == 2.0 {
                    let (lo, hi) = dyadic_bracket(s);
                    for l in &t.per_level {
                        let besov = (s * l.level as f64).exp2() * l2_norm_parseval(&f, &smooth, l.level) / TAU.powf(d as f64 / 2.0);
                        if besov > 0.0 || l.smooth > 0.0 {
                            let r = l.smooth / besov;
                            p2.0 = p2.0.min(r / lo);
                            p2.1 = p2.1.max(r / hi);
                            p2.2 = p2.2.min(r);
                            p2.3 = p2.3.max(r);
                        }
                    }
                }
            }
        }
        Ok((rows, p2))
    })?;

    let mut summary = ExperimentSummary::new(cfg);
    let mut table = Table::new(
        "equivalence",
        &["field", "s", "p", "q", "sharp", "smooth", "dyadic", "sharp_over_smooth", "sharp_over_dyadic"],
    );
    let (mut le_bad, mut three_bad, mut bracket_bad) = (0usize, 0usize, 0usize);
    let (mut max_smooth_sharp, mut max_sharp_3smooth) = (0.0f64, 0.0f64);
    let (mut min_sd, mut max_sd) = (f64::INFINITY, 0.0f64);
    for (i, (rows, _)) in per_field.iter().enumerate() {
        for r in rows {
            let (sh, sm, dy) = r.v;
            let (lo, hi) = dyadic_bracket(r.s);
            if sm > sh * rel {
                le_bad += 1;
            }
            if sh > 3.0 * sm * rel {
                three_bad += 1;
            }
            if lo * dy > sh * rel || sh > hi * dy * rel {
                bracket_bad += 1;
            }
            if sh > 0.0 {
                max_smooth_sharp = max_smooth_sharp.max(sm / sh);
                max_sharp_3smooth = max_sharp_3smooth.max(sh / (3.0 * sm));
            }
            if dy > 0.0 {
                let x = sh / dy;
                // normalised to the bracket so one number covers every s
                min_sd = min_sd.min(x / lo);
                max_sd = max_sd.max(x / hi);
            }
            table.push(vec![cell(i), num(r.s), Exponent(r.p).to_string(), Exponent(r.q).to_string(), num(sh), num(sm), num(dy), num(sh / sm), num(sh / dy)]);
        }
    }
    let checks = per_field.iter().map(|(r, _)| r.len()).sum::<usize>();
    summary.assert(Assertion::new("equivalence.smooth_le_sharp", le_bad == 0, max_smooth_sharp, "<= 1", format!("relative {}", tol.equiv_rel)).with_detail(format!("{le_bad} violations in {checks} checks")));
    summary.assert(Assertion::new("equivalence.sharp_le_3_smooth", three_bad == 0, max_sharp_3smooth, "<= 1 (sharp / (3 smooth))", format!("relative {}", tol.equiv_rel)).with_detail(format!("{three_bad} violations in {checks} checks")));
    summary.assert(
        Assertion::new("equivalence.dyadic_bracket", bracket_bad == 0, min_sd.min(1.0 / max_sd.max(f64::MIN_POSITIVE)), ">= 1 (distance inside the bracket)", format!("relative {}", tol.equiv_rel))
            .with_detail(format!("{bracket_bad} violations in {checks} checks; (sharp/dyadic)/lo min {min_sd}, (sharp/dyadic)/hi max {max_sd}")),
    );
    summary.observe("max_smooth_over_sharp", max_smooth_sharp);
    summary.observe("max_sharp_over_3_smooth", max_sharp_3smooth);
    summary.observe("min_sharp_over_dyadic_relative_to_lower", min_sd);
    summary.observe("max_sharp_over_dyadic_relative_to_upper", max_sd);

    if p_grid.contains(&2.0) {
        let lo = per_field.iter().map(|(_, p)| p.0).fold(f64::INFINITY, f64::min);
        let hi = per_field.iter().map(|(_, p)| p.1).fold(0.0, f64::max);
        summary.assert(
            Assertion::new("equivalence.p2_levelwise_bracket", lo >= 1.0 / rel && hi <= rel, lo, "ratio / lower >= 1 and ratio / upper <= 1", format!("relative {}", tol.equiv_rel))
                .with_detail(format!("largest ratio / upper {hi}")),
        );
        summary.observe("p2_level_ratio_min", per_field.iter().map(|(_, p)| p.2).fold(f64::INFINITY, f64::min));
        summary.observe("p2_level_ratio_max", per_field.iter().map(|(_, p)| p.3).fold(0.0, f64::max));
    }

    let mut tables = vec![table];
    hausdorff_young(cfg, &mut summary, &mut tables)?;
    Ok(ExperimentOutput { summary: summary.finish(), tables })
}

/// `fb_sharp(s, p, inf) / besov(s, p', inf)` must not trend upward in `N`.
fn hausdorff_young(cfg: &ExperimentConfig, summary: &mut ExperimentSummary, tables: &mut Vec<Table>) -> Result<()> {
    let ps: Vec<f64> = cfg.p_values.iter().map(|p| p.get()).filter(|p| *p == 2.0 || *p == 4.0).collect();
    if ps.is_empty() {
        return Ok(());
    }
    let d = cfg.d;
    let s = -(d as f64) / 2.0;
    let ns: Vec<u32> = (6..=11).map(|e| 1u32 << e).collect();
    let top = *ns.last().expect("nonempty");
    cfg.guard_field(d, top)?;
    let trials = cfg.equivalence_fields.min(10);
    let mut table = Table::new("hausdorff_young", &["N", "p", "trial", "fourier_besov", "besov_conjugate", "ratio"]);
    for p in ps {
        let pc = p / (p - 1.0);
        let params = BesovParams { osf: cfg.osf, quadrature_tol: cfg.quadrature_tol, ..BesovParams::new(s, pc, f64::INFINITY) };
        let rows = par_trials(trials, |t| {
            let f = noise(cfg, d, top, t)?;
            ns.iter()
                .map(|&n| {
                    let g = f.truncated(n)?;
                    let fb = fb_norms_with(&g, s, p, f64::INFINITY, &PartitionProfile::smooth())?.sharp_value;
                    let b = besov_norm(&g, &params)?.value_all_levels;
                    Ok((fb, b))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (ni, &n) in ns.iter().enumerate() {
            let ratios: Vec<f64> = rows.iter().map(|r| r[ni].0 / r[ni].1).collect();
            for (t, r) in rows.iter().enumerate() {
                table.push(vec![cell(n), Exponent(p).to_string(), cell(t), num(r[ni].0), num(r[ni].1), num(ratios[t])]);
            }
            xs.push((n as f64).log2());
            ys.push(stats::mean(&ratios).log2());
        }
        let fit = linear_fit(&xs, &ys);
        summary.fits.push(FitReport::new(format!("hausdorff_young.p{}", Exponent(p)), fit, 0.0));
        summary.assert(Assertion::new(
            format!("equivalence.hausdorff_young.p{}", Exponent(p)),
            fit.slope <= cfg.tolerances.slope,
            fit.slope,
            "no upward trend in log2 N",
            format!("slope <= {}", cfg.tolerances.slope),
        ));
    }
    tables.push(table);
    Ok(())
}
