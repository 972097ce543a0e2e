//! Finite-N proxies for divergence at the critical index: level contributions
//! bounded below, growth of the running sup of `W_{3j}(0)`, and growth of
//! `max |gamma_k|`.

use noiselab_core::lattice::Dim;
use noiselab_core::randfield::sup_modulus_upto;
use noiselab_core::stats;
use noiselab_core::synthesis::{block_lp_norm, QuadratureOptions};
use noiselab_core::Complex64;

use super::{cell, column, noise, num, par_trials, plot_row, Assertion, ExperimentOutput, ExperimentSummary, Table};
use crate::config::ExperimentConfig;
use crate::error::{AppError, Result};

/// Fraction of trials whose running max of `|gamma_k|` grows by at least
/// `growth_min` from `N0` to `4 N0`; passes on a strict majority.
pub fn sup_growth(cfg: &ExperimentConfig) -> Result<(Assertion, Table)> {
    let n0 = cfg.growth_base_cutoff;
    let n1 = n0.checked_mul(4).ok_or_else(|| AppError::Validation("growth_base_cutoff too large".into()))?;
    cfg.guard_field(cfg.d, n1)?;
    let rows = par_trials(cfg.trials, |t| {
        let f = noise(cfg, cfg.d, n1, t)?;
        Ok((sup_modulus_upto(&f, n0), sup_modulus_upto(&f, n1)))
    })?;
    let mut table = Table::new("sup_growth", &["trial", "sup_n", "sup_4n", "relative_growth"]);
    let mut grown = 0;
    for (t, (a, b)) in rows.iter().enumerate() {
        let g = b / a - 1.0;
        if g >= cfg.tolerances.growth_min {
            grown += 1;
        }
        table.push(vec![cell(t), num(*a), num(*b), num(g)]);
    }
    let frac = grown as f64 / rows.len() as f64;
    let a = Assertion::new(
        "sup_growth",
        frac > 0.5,
        frac,
        "> 0.5",
        format!("growth >= {} from N = {n0} to {n1}", cfg.tolerances.growth_min),
    );
    Ok((a, table))
}

struct Trial {
    /// `2^(js) ||W_j||_p` at `s = -d/2`, `j = 0..=jmax`.
    levels: Vec<f64>,
    /// `W_{3j}(0)` for `j = 1..=jmax/3`.
    point: Vec<Complex64>,
}

pub fn run_divergence_checks(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.guard_field(cfg.d, cfg.cutoff)?;
    let d = cfg.d;
    let df = d as f64;
    let p = cfg.p.get();
    let tol = &cfg.tolerances;
    let j_end = cfg.jmax / 3;
    let j_half = j_end / 2;
    let opts = QuadratureOptions { osf: cfg.osf, tol: cfg.quadrature_tol, ..QuadratureOptions::default() };
    let prof = cfg.partition;

    let trials = par_trials(cfg.trials, |t| {
        let f = noise(cfg, d, cfg.cutoff, t)?;
        let levels = (0..=cfg.jmax)
            .map(|j| block_lp_norm(&f, &prof, j, p, &opts).map(|b| (-df * j as f64 / 2.0).exp2() * b.value))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut point = vec![Complex64::new(0.0, 0.0); j_end as usize];
        let outer = if j_end == 0 { 0 } else { 1u64 << (6 * j_end + 2) };
        for (n, c) in f.iter_norm_sq() {
            if n > outer {
                continue;
            }
            for j in 1..=j_end {
                let w = prof.phi_j_sq(3 * j, n);
                if w != 0.0 {
                    point[j as usize - 1] += c * w;
                }
            }
        }
        Ok(Trial { levels, point })
    })?;

    let mut summary = ExperimentSummary::new(cfg);
    let mut tables = Vec::new();

    // (a) level contributions at s = -d/2
    let rows: Vec<Vec<f64>> = trials.iter().map(|t| t.levels.clone()).collect();
    let mut level_table = Table::new("divergence_levels", &["level_j", "trial", "weighted"]);
    let mut level_plot = Table::plot("divergence_levels_plot");
    let scale = std::f64::consts::TAU.powf(df / p);
    for j in 0..=cfg.jmax {
        let xs = column(&rows, j as usize);
        for (t, v) in xs.iter().enumerate() {
            level_table.push(vec![cell(j), cell(t), num(*v)]);
        }
        level_plot.push(plot_row(j as f64, &xs, tol.se_mult));
        summary.level("weighted_level", j, &xs);
    }
    let ratios: Vec<f64> = (cfg.fit_min..=cfg.jmax)
        .map(|j| stats::mean(&column(&rows, j as usize)) / scale)
        .collect();
    if ratios.is_empty() {
        summary.assert(Assertion::inconclusive("divergence.a.levels_bounded_below", "fit_min exceeds jmax"));
    } else {
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        summary.assert(
            Assertion::new(
                "divergence.a.levels_bounded_below",
                lo >= tol.level_lo && hi <= tol.level_hi,
                lo,
                format!("mean level / (2 pi)^(d/p) in [{}, {}] for j in [{}, {}]", tol.level_lo, tol.level_hi, cfg.fit_min, cfg.jmax),
                "bracket",
            )
            .with_detail(format!("largest ratio {hi}")),
        );
    }
    tables.push(level_table);
    tables.push(level_plot);

    // (b) running sup of 2^(-3jd/2) |W_{3j}(0)|
    if j_half == 0 {
        summary.assert(Assertion::inconclusive("divergence.b", "need jmax >= 6 for two sampled levels 3j"));
    } else {
        let scaled = |t: &Trial, j: u32| (-1.5 * df * j as f64).exp2() * t.point[j as usize - 1].norm();
        let running = |t: &Trial, upto: u32| (1..=upto).map(|j| scaled(t, j)).fold(0.0, f64::max);
        let mut point_table = Table::new("divergence_point", &["j", "trial", "re", "im", "scaled_modulus"]);
        for j in 1..=j_end {
            for (t, tr) in trials.iter().enumerate() {
                let w = tr.point[j as usize - 1];
                point_table.push(vec![cell(3 * j), cell(t), num(w.re), num(w.im), num(scaled(tr, j))]);
            }
        }
        tables.push(point_table);
        let diffs: Vec<f64> = trials.iter().map(|t| running(t, j_end) - running(t, j_half)).collect();
        let strict = diffs.iter().filter(|x| **x > 0.0).count() as f64 / diffs.len() as f64;
        summary.assert(
            Assertion::new(
                "divergence.b.strict_increase",
                strict >= tol.increase_fraction,
                strict,
                format!(">= {}", tol.increase_fraction),
                format!("fraction of trials with running sup at 3j <= {} above the one at 3j <= {}", 3 * j_end, 3 * j_half),
            )
            .with_detail("near-independent levels make this fraction about 1/2 at any depth"),
        );
        let (m, se) = (stats::mean(&diffs), stats::std_err(&diffs));
        summary.assert(if diffs.len() < 2 {
            Assertion::inconclusive("divergence.b.mean_growth", "needs at least two trials")
        } else {
            Assertion::new(
                "divergence.b.mean_growth",
                m > tol.se_mult * se,
                m,
                "> 0",
                format!("{} standard errors ({se})", tol.se_mult),
            )
        });
        // second moments against sum phi^2
        let dim = Dim::new(d).map_err(|e| AppError::Validation(e.to_string()))?;
        let mut floor = f64::INFINITY;
        for j in 1..=j_end {
            let xs: Vec<f64> = trials
                .iter()
                .map(|t| (-3.0 * df * j as f64).exp2() * t.point[j as usize - 1].norm_sqr())
                .collect();
            let (mean, se) = summary.level("point_second_moment", 3 * j, &xs);
            let oracle = prof.phi_sq_sum(3 * j, dim) * (-3.0 * df * j as f64).exp2();
            summary.observe(format!("point_second_moment_oracle.j{}", 3 * j), oracle);
            floor = floor.min(oracle);
            if xs.len() >= 2 {
                summary.assert(Assertion::new(
                    format!("divergence.b.second_moment.j{}", 3 * j),
                    (mean - oracle).abs() <= tol.se_mult * se,
                    mean,
                    format!("{oracle}"),
                    format!("{} standard errors ({se})", tol.se_mult),
                ));
            }
        }
        summary.assert(Assertion::new("divergence.b.second_moment_floor", floor >= 1.0, floor, ">= 1", "uniform in j"));
        // decorrelation across levels
        let need = (tol.se_mult / tol.corr_max).powi(2).ceil() as usize;
        if j_end < 2 {
            summary.assert(Assertion::inconclusive("divergence.b.uncorrelated", "need two sampled levels"));
        } else if trials.len() < need {
            summary.assert(Assertion::inconclusive(
                "divergence.b.uncorrelated",
                format!("{} trials cannot resolve correlations below {}; need {need}", trials.len(), tol.corr_max),
            ));
        } else {
            let mut worst = 0.0f64;
            for a in 1..=j_end {
                for b in a + 1..=j_end {
                    let (mut sab, mut saa, mut sbb) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
                    for t in &trials {
                        let (x, y) = (t.point[a as usize - 1], t.point[b as usize - 1]);
                        sab += x * y.conj();
                        saa += x.norm_sqr();
                        sbb += y.norm_sqr();
                    }
                    worst = worst.max(sab.norm() / (saa * sbb).sqrt());
                }
            }
            summary.assert(Assertion::new("divergence.b.uncorrelated", worst < tol.corr_max, worst, format!("< {}", tol.corr_max), "max over level pairs"));
        }
    }

    // (c) max |gamma_k|
    let (a, table) = sup_growth(cfg)?;
    summary.assert(a.renamed("divergence.c.sup_growth"));
    tables.push(table);
    Ok(ExperimentOutput { summary: summary.finish(), tables })
}
