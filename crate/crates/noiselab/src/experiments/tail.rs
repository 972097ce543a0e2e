//! Gaussian concentration of the norm around its median:
//! `P(|X - M| > r) <= exp(-r^2 / (4 sigma^2))`.

use std::f64::consts::TAU;

use noiselab_core::besov::lq_norm;
use noiselab_core::fourier_besov::fb_norms_with;
use noiselab_core::partition::PartitionProfile;
use noiselab_core::stats;
use noiselab_core::synthesis::{block_lp_norm, QuadratureOptions};
use noiselab_core::FbVariant;

use super::{noise, num, par_trials, Assertion, ExperimentOutput, ExperimentSummary, Table};
use crate::config::{ExperimentConfig, Space};
use crate::error::Result;

/// Weak-variance constant of the concentration bound.
pub fn tail_sigma(space: Space, d: usize, p: f64) -> f64 {
    let df = d as f64;
    match (space, p >= 2.0) {
        (Space::Besov, true) => (1.5 * df).exp2() * (-3.0 * df / p).exp2(),
        (Space::Besov, false) => TAU.powf(df / p - df / 2.0),
        (Space::FourierBesov, true) => 1.0,
        (Space::FourierBesov, false) => (3.0 * df / p).exp2() * (-1.5 * df).exp2(),
    }
}

fn label(space: Space, v: Option<FbVariant>) -> String {
    match v {
        None => space.name().to_string(),
        Some(FbVariant::Sharp) => format!("{}_sharp", space.name()),
        Some(FbVariant::Smooth) => format!("{}_smooth", space.name()),
        Some(FbVariant::Dyadic) => format!("{}_dyadic", space.name()),
    }
}

pub fn run_tail(cfg: &ExperimentConfig, space: Space) -> Result<ExperimentOutput> {
    cfg.guard_field(cfg.d, cfg.cutoff)?;
    let (p, q, s) = (cfg.p.get(), cfg.q.get(), cfg.s);
    let levels = cfg.jmax as usize + 1;
    let variants: Vec<Option<FbVariant>> = match space {
        Space::Besov => vec![None],
        Space::FourierBesov => cfg.fb_variant.variants().into_iter().map(Some).collect(),
    };
    let opts = QuadratureOptions { osf: cfg.osf, tol: cfg.quadrature_tol, ..QuadratureOptions::default() };
    let smooth = if cfg.partition.is_sharp() { PartitionProfile::smooth() } else { cfg.partition };
    // norms restricted to complete levels j <= jmax
    let rows = par_trials(cfg.trials, |t| {
        let f = noise(cfg, cfg.d, cfg.cutoff, t)?;
        match space {
            Space::Besov => {
                let w = (0..levels as u32)
                    .map(|j| Ok(block_lp_norm(&f, &cfg.partition, j, p, &opts)?.value * (s * j as f64).exp2()))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(vec![lq_norm(w.into_iter(), q)])
            }
            Space::FourierBesov => {
                let tr = fb_norms_with(&f, s, p, q, &smooth)?;
                let lv = &tr.per_level[..levels];
                Ok(variants
                    .iter()
                    .map(|v| {
                        let vals = lv.iter().map(|l| match v.expect("variant") {
                            FbVariant::Sharp => l.sharp,
                            FbVariant::Smooth => l.smooth,
                            FbVariant::Dyadic => l.dyadic,
                        });
                        lq_norm(vals, q)
                    })
                    .collect())
            }
        }
    })?;

    let tol = &cfg.tolerances;
    let n = rows.len();
    let sigma = tail_sigma(space, cfg.d, p);
    let mut summary = ExperimentSummary::new(cfg);
    summary.observe("sigma", sigma);
    let mut tables = Vec::new();
    for (vi, v) in variants.iter().enumerate() {
        let name = label(space, *v);
        let xs: Vec<f64> = rows.iter().map(|r| r[vi]).collect();
        let sorted = stats::sorted(&xs);
        let med = stats::quantile_sorted(&sorted, 0.5);
        if vi == 0 {
            summary.median = Some(med);
            summary.quantiles = [0.05, 0.25, 0.5, 0.75, 0.95].iter().map(|&a| (a, stats::quantile_sorted(&sorted, a))).collect();
        }
        summary.observe(format!("median_{name}"), med);
        let bound = |r: f64| (-r * r / (4.0 * sigma * sigma)).exp();
        let floor = 10.0 / n as f64;
        let grid: Vec<f64> = match &cfg.r_grid {
            Some(g) => g.iter().copied().filter(|&r| bound(r) > floor).collect(),
            None => (1..).map(|k| 0.25 * k as f64).take_while(|&r| bound(r) > floor).collect(),
        };
        let mut table = Table::new(format!("tail_{name}"), &["r", "empirical_tail", "bound", "pass"]);
        let mut plot = Table::plot(format!("tail_{name}_plot"));
        let dev: Vec<f64> = xs.iter().map(|x| (x - med).abs()).collect();
        let mut worst = 0.0f64;
        let mut all = true;
        for &r in &grid {
            let emp = dev.iter().filter(|&&e| e > r).count() as f64 / n as f64;
            let b = bound(r);
            let allow = stats::binomial_upper(b, n, tol.se_mult);
            let ok = emp <= allow;
            all &= ok;
            worst = worst.max(emp / b);
            table.push(vec![num(r), num(emp), num(b), ok.to_string()]);
            let se = (emp * (1.0 - emp) / n as f64).sqrt();
            plot.push(vec![num(r), num(emp), num((emp - tol.se_mult * se).max(0.0)), num(emp + tol.se_mult * se)]);
        }
        summary.assert(if grid.is_empty() {
            Assertion::inconclusive(format!("tail.{name}"), format!("no r with bound above 10/trials = {floor}"))
        } else {
            Assertion::new(
                format!("tail.{name}"),
                all,
                worst,
                format!("empirical tail <= exp(-r^2/(4 sigma^2)), sigma = {sigma}, at {} radii", grid.len()),
                format!("one-sided binomial {} standard errors", tol.se_mult),
            )
            .with_detail("observed = largest empirical/bound ratio")
        });
        // E exp(X^2 / (4 alpha^2)) with alpha = 2 sigma
        let alpha = 2.0 * sigma;
        let e: Vec<f64> = xs.iter().map(|x| (x * x / (4.0 * alpha * alpha)).exp()).collect();
        let half = stats::mean(&e[..n.div_ceil(2)]);
        let full = stats::mean(&e);
        summary.observe(format!("exp_moment_half_{name}"), half);
        summary.observe(format!("exp_moment_full_{name}"), full);
        summary.assert(Assertion::new(format!("tail.{name}.exp_moment_finite"), full.is_finite() && half.is_finite(), full, "finite", "no overflow"));
        tables.push(table);
        tables.push(plot);
    }
    Ok(ExperimentOutput { summary: summary.finish(), tables })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmas() {
        assert!((tail_sigma(Space::Besov, 1, 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(tail_sigma(Space::FourierBesov, 1, 2.0), 1.0);
        assert!((tail_sigma(Space::FourierBesov, 1, 1.0) - 2f64.powf(1.5)).abs() < 1e-15);
        assert!((tail_sigma(Space::Besov, 1, 1.0) - TAU.sqrt()).abs() < 1e-15);
    }
}
