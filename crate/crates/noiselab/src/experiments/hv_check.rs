//! `E sup_j 2^(-jd/2) ||W_j||_p <= m + 3 sqrt(2) rho(sigma)`.

use std::f64::consts::TAU;

use noiselab_core::orlicz::{luxemburg_rho, WeightSequence, DEFAULT_TOL};
use noiselab_core::stats;
use noiselab_core::synthesis::{block_lp_norm, QuadratureOptions};

use super::{cell, column, noise, num, par_trials, plot_row, Assertion, ExperimentOutput, ExperimentSummary, Table};
use crate::config::ExperimentConfig;
use crate::error::{AppError, Result};

/// Weak-variance bounds per level.
pub fn sigma_sequence(d: usize, p: f64, jmax: u32) -> Vec<f64> {
    let df = d as f64;
    (0..=jmax)
        .map(|j| {
            let j = j as f64;
            if p >= 2.0 {
                (1.5 * df).exp2() * (-(j + 3.0) * df / p).exp2()
            } else {
                TAU.powf(df / p - df / 2.0) * (-j * df / 2.0).exp2()
            }
        })
        .collect()
}

pub fn run_hv_check(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let d = cfg.d;
    let df = d as f64;
    let p = cfg.p.get();
    if p.is_infinite() {
        return Err(AppError::Validation("hv_check needs a finite p".into()));
    }
    let cutoff = 1u32 << (cfg.jmax + 1);
    cfg.guard_field(d, cutoff)?;
    let prof = cfg.partition;
    let opts = QuadratureOptions { osf: cfg.osf, tol: cfg.quadrature_tol, ..QuadratureOptions::default() };
    let rows = par_trials(cfg.trials, |t| {
        let f = noise(cfg, d, cutoff, t)?;
        (0..=cfg.jmax)
            .map(|j| Ok(block_lp_norm(&f, &prof, j, p, &opts)?.value * (-df * j as f64 / 2.0).exp2()))
            .collect::<Result<Vec<f64>>>()
    })?;

    let tol = &cfg.tolerances;
    let mut summary = ExperimentSummary::new(cfg);
    let mut plot = Table::plot("hv_check_levels_plot");
    let mut m_hat = 0.0f64;
    for j in 0..=cfg.jmax {
        let xs = column(&rows, j as usize);
        let (m, _) = summary.level("scaled_block_norm", j, &xs);
        m_hat = m_hat.max(m);
        plot.push(plot_row(j as f64, &xs, tol.se_mult));
    }
    let sups: Vec<f64> = rows.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    let mut data = Table::new("hv_check", &["trial", "sup_scaled_block_norm"]);
    for (t, s) in sups.iter().enumerate() {
        data.push(vec![cell(t), num(*s)]);
    }
    let sigma = sigma_sequence(d, p, cfg.jmax);
    let rho = luxemburg_rho(&WeightSequence::finite(sigma.clone()), DEFAULT_TOL)?;
    let bound = m_hat + 3.0 * std::f64::consts::SQRT_2 * rho;
    let (mean, se) = (stats::mean(&sups), stats::std_err(&sups));
    let se = if se.is_finite() { se } else { 0.0 };
    summary.assert(Assertion::new(
        "hv_check.bound",
        mean - tol.se_mult * se <= bound,
        mean,
        format!("<= {bound}"),
        format!("one-sided {} standard errors ({se})", tol.se_mult),
    ));
    summary.observe("m_hat", m_hat);
    summary.observe("rho_sigma", rho);
    summary.observe("bound", bound);
    summary.observe("sigma_0", sigma[0]);
    if p < 2.0 {
        summary.observe("constant_without_d", TAU.powf(1.0 / p - 0.5));
        summary.observe("constant_with_d", TAU.powf(df / p - df / 2.0));
    }
    Ok(ExperimentOutput { summary: summary.finish(), tables: vec![data, plot] })
}
