//! `max_{|k| <= N} |gamma_k| / sqrt(log(|k|^d + 1))` over nested cutoffs.

use noiselab_core::randfield::log_sup_statistic_upto;
use noiselab_core::stats;

use super::{cell, noise, num, par_trials, Assertion, ExperimentOutput, ExperimentSummary, Table};
use crate::config::ExperimentConfig;
use crate::error::Result;

pub fn cutoffs(from: u32, to: u32) -> Vec<u32> {
    let mut v: Vec<u32> = std::iter::successors(Some(from), |n| n.checked_mul(2)).take_while(|&n| n <= to).collect();
    if v.last() != Some(&to) {
        v.push(to);
    }
    v
}

pub fn run_logsup(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let ns = cutoffs(cfg.logsup_from, cfg.logsup_to);
    cfg.guard_field(cfg.d, cfg.logsup_to)?;
    let rows = par_trials(cfg.trials, |t| {
        let f = noise(cfg, cfg.d, cfg.logsup_to, t)?;
        Ok(ns.iter().map(|&n| log_sup_statistic_upto(&f, n)).collect::<Vec<f64>>())
    })?;
    let mut summary = ExperimentSummary::new(cfg);
    let mut data = Table::new("logsup", &["N", "trial", "statistic"]);
    let mut plot = Table::plot("logsup_plot");
    let mut medians = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let xs: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        for (t, x) in xs.iter().enumerate() {
            data.push(vec![cell(n), cell(t), num(*x)]);
        }
        let sorted = stats::sorted(&xs);
        let med = stats::quantile_sorted(&sorted, 0.5);
        medians.push(med);
        summary.level("logsup", n, &xs);
        plot.push(vec![
            num((n as f64).log2()),
            num(med),
            num(stats::quantile_sorted(&sorted, 0.25)),
            num(stats::quantile_sorted(&sorted, 0.75)),
        ]);
    }
    let growth = medians[medians.len() - 1] / medians[0] - 1.0;
    summary.median = medians.last().copied();
    summary.assert(Assertion::new(
        "logsup.median_growth",
        growth < cfg.tolerances.logsup_max_growth,
        growth,
        format!("< {}", cfg.tolerances.logsup_max_growth),
        format!("relative growth of the median from N = {} to N = {}", cfg.logsup_from, cfg.logsup_to),
    ));
    Ok(ExperimentOutput { summary: summary.finish(), tables: vec![data, plot] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_ladder() {
        assert_eq!(cutoffs(64, 512), vec![64, 128, 256, 512]);
        assert_eq!(cutoffs(3, 10), vec![3, 6, 10]);
    }
}
