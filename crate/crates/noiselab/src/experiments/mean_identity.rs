//! `(E ||W_j||_p^p)^(1/p) = (2 pi)^(d/p) ||gamma||_p (sum_k phi_j(k)^2)^(1/2)`.

use std::f64::consts::TAU;

use noiselab_core::lattice::Dim;
use noiselab_core::randfield::gamma_moment;
use noiselab_core::stats;
use noiselab_core::synthesis::{block_band, block_lp_norm, l2_norm_parseval, lp_norm_grid, synthesize_block, QuadratureOptions};

use super::{cell, noise, num, par_trials, Assertion, ExperimentOutput, ExperimentSummary, Table};
use crate::config::{ExperimentConfig, Exponent};
use crate::error::{AppError, Result};

pub fn run_mean_identity(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let d = cfg.d;
    let df = d as f64;
    let dim = Dim::new(d).map_err(|e| AppError::Validation(e.to_string()))?;
    let ps: Vec<f64> = cfg.p_values.iter().map(|p| p.get()).collect();
    if ps.iter().any(|p| p.is_infinite()) {
        return Err(AppError::Validation("mean_identity needs finite exponents".into()));
    }
    let top = cfg.levels.iter().copied().max().unwrap_or(0);
    let cutoff = cfg.cutoff.min(1 << (top + 1)).max(1);
    cfg.guard_field(d, cutoff)?;
    let prof = cfg.partition;
    let opts = QuadratureOptions { osf: cfg.osf, tol: cfg.quadrature_tol, ..QuadratureOptions::default() };
    let check_parseval = ps.contains(&2.0);

    // [trial] -> ([p][level] ||W_j||_p, max relative Parseval residual)
    let trials = par_trials(cfg.trials, |t| {
        let f = noise(cfg, d, cutoff, t)?;
        let mut norms = Vec::with_capacity(ps.len());
        for &p in &ps {
            norms.push(
                cfg.levels
                    .iter()
                    .map(|&j| block_lp_norm(&f, &prof, j, p, &opts).map(|b| b.value))
                    .collect::<std::result::Result<Vec<_>, _>>()?,
            );
        }
        let mut residual = 0.0f64;
        if check_parseval {
            for &j in &cfg.levels {
                let m = ((cfg.osf as f64 * block_band(&f, j)) as usize).max(1).next_power_of_two();
                let grid = lp_norm_grid(&synthesize_block(&f, &prof, j, m)?, 2.0)?.value;
                let exact = l2_norm_parseval(&f, &prof, j);
                if exact > 0.0 {
                    residual = residual.max((grid - exact).abs() / exact);
                }
            }
        }
        Ok((norms, residual))
    })?;

    let tol = &cfg.tolerances;
    let mut summary = ExperimentSummary::new(cfg);
    let mut data = Table::new("mean_identity", &["p", "level_j", "trial", "block_norm"]);
    let mut tables = Vec::new();
    for (pi, &p) in ps.iter().enumerate() {
        let moment = gamma_moment(p)?;
        let mut plot = Table::plot(format!("mean_identity_plot_p{}", Exponent(p)));
        let mut sup_mean = 0.0f64;
        let mut sup_se = 0.0;
        let mut sup_oracle = 0.0f64;
        for (li, &j) in cfg.levels.iter().enumerate() {
            let xs: Vec<f64> = trials.iter().map(|(n, _)| n[pi][li]).collect();
            for (t, x) in xs.iter().enumerate() {
                data.push(vec![Exponent(p).to_string(), cell(j), cell(t), num(*x)]);
            }
            let powers: Vec<f64> = xs.iter().map(|x| x.powf(p)).collect();
            let (m, se) = (stats::mean(&powers), stats::std_err(&powers));
            summary.level(format!("norm_p{}", Exponent(p)), j, &xs);
            let phi2 = prof.phi_sq_sum(j, dim);
            let target = TAU.powf(df / p) * moment * phi2.sqrt();
            let lo = (m - tol.se_mult * se).max(0.0).powf(1.0 / p);
            let hi = (m + tol.se_mult * se).powf(1.0 / p);
            plot.push(vec![num(j as f64), num(m.powf(1.0 / p)), num(lo), num(hi)]);
            summary.assert(if xs.len() < 2 {
                Assertion::inconclusive(format!("mean_identity.p{}.j{j}", Exponent(p)), "needs at least two trials")
            } else {
                Assertion::new(
                    format!("mean_identity.p{}.j{j}", Exponent(p)),
                    (m - target.powf(p)).abs() <= tol.se_mult * se,
                    m.powf(1.0 / p),
                    format!("{target}"),
                    format!("{} standard errors of the p-th power mean ({se})", tol.se_mult),
                )
            });
            // sup_j 2^(-jd/2) E ||W_j||_p
            let scale = (-df * j as f64 / 2.0).exp2();
            let mean_norm = stats::mean(&xs);
            if scale * mean_norm > sup_mean {
                sup_mean = scale * mean_norm;
                sup_se = scale * stats::std_err(&xs);
            }
            sup_oracle = sup_oracle.max(TAU.powf(df / p) * moment * (phi2 * (-df * j as f64).exp2()).sqrt());
        }
        let sup_se = if sup_se.is_finite() { sup_se } else { 0.0 };
        summary.assert(Assertion::new(
            format!("mean_identity.p{}.sup_bounded", Exponent(p)),
            sup_mean - tol.se_mult * sup_se <= sup_oracle,
            sup_mean,
            format!("<= {sup_oracle}"),
            format!("one-sided {} standard errors", tol.se_mult),
        ));
        summary.observe(format!("reported_sup_constant_p{}", Exponent(p)), moment * TAU.powf(df / p));
        tables.push(plot);
    }
    if check_parseval {
        let worst = trials.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        summary.assert(Assertion::new(
            "mean_identity.p2.parseval_residual",
            worst <= tol.parseval_rel,
            worst,
            "0",
            format!("relative {}", tol.parseval_rel),
        ));
    }
    tables.insert(0, data);
    Ok(ExperimentOutput { summary: summary.finish(), tables })
}
