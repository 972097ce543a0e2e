//! Shell averages of `|gamma_k|^2` and `|gamma_k|^p` against their lattice limits.

use noiselab_core::lattice::{shell_count, shell_count_limit, Dim, ShellKind, ShellSpec};
use noiselab_core::randfield::gamma_moment;
use noiselab_core::stats;

use super::{column, noise, num, par_trials, plot_row, Assertion, ExperimentOutput, ExperimentSummary, Table};
use crate::config::ExperimentConfig;
use crate::error::{AppError, Result};

/// `2^(-jd) sum_{k in shell_j} |c_k|^p` for `j = 1..=jmax`, one pass over the field.
fn shell_averages(field: &noiselab_core::SpectralField, kind: ShellKind, jmax: u32, p: f64) -> Vec<f64> {
    let d = field.dim().get() as f64;
    let specs: Vec<ShellSpec> = (1..=jmax).map(|j| ShellSpec::new(j, kind).expect("level >= 1")).collect();
    let mut sums = vec![0.0; jmax as usize];
    let outer = specs.last().map(|s| s.outer_radius_sq()).unwrap_or(0);
    for (n, c) in field.iter_norm_sq() {
        if n == 0 || n > outer {
            continue;
        }
        let v = if p == 2.0 { c.norm_sqr() } else { c.norm().powf(p) };
        // at most three wide shells, one narrow shell
        let lvl = (63 - n.leading_zeros()) / 2;
        for j in lvl.saturating_sub(1).max(1)..=(lvl + 2).min(jmax) {
            if specs[j as usize - 1].contains_sq(n) {
                sums[j as usize - 1] += v;
            }
        }
    }
    sums.iter().enumerate().map(|(i, s)| s * (-(d * (i + 1) as f64)).exp2()).collect()
}

struct Lln {
    name: &'static str,
    kind: ShellKind,
    p: f64,
    /// `E |gamma|^p`.
    moment: f64,
    rel_tol: f64,
}

type ShellRun = (ExperimentSummary, Vec<Table>, Vec<Vec<f64>>, f64);

fn run_shell_lln(cfg: &ExperimentConfig, lln: Lln) -> Result<ShellRun> {
    let d = cfg.d;
    let dim = Dim::new(d).map_err(|e| AppError::Validation(e.to_string()))?;
    cfg.guard_field(d, cfg.cutoff)?;
    let rows = par_trials(cfg.trials, |t| Ok(shell_averages(&noise(cfg, d, cfg.cutoff, t)?, lln.kind, cfg.jmax, lln.p)))?;
    let limit = shell_count_limit(d, lln.kind) * lln.moment;
    let tol = &cfg.tolerances;

    let mut summary = ExperimentSummary::new(cfg);
    let mut data = Table::new(lln.name, &["level_j", "trial", "statistic"]);
    for (t, r) in rows.iter().enumerate() {
        for (i, v) in r.iter().enumerate() {
            data.push(vec![num((i + 1) as f64), num(t as f64), num(*v)]);
        }
    }
    let mut plot = Table::plot(format!("{}_plot", lln.name));
    let mut expectation_checks = Vec::new();
    for j in 1..=cfg.jmax {
        let xs = column(&rows, j as usize - 1);
        let (mean, se) = summary.level(lln.name, j, &xs);
        plot.push(plot_row(j as f64, &xs, tol.se_mult));
        let exact = shell_count(dim, ShellSpec::new(j, lln.kind)?) as f64 * (-(d as f64) * j as f64).exp2() * lln.moment;
        if xs.len() >= 2 {
            expectation_checks.push(
                Assertion::new(
                    format!("{}.expectation.j{j}", lln.name),
                    (mean - exact).abs() <= tol.se_mult * se,
                    mean,
                    format!("{exact}"),
                    format!("{} standard errors ({se})", tol.se_mult),
                ),
            );
        }
    }
    if expectation_checks.is_empty() {
        summary.assert(Assertion::inconclusive(
            format!("{}.expectation", lln.name),
            "at least two trials are needed for a standard error",
        ));
    }
    for a in expectation_checks {
        summary.assert(a);
    }
    let top = column(&rows, cfg.jmax as usize - 1);
    let mean_top = stats::mean(&top);
    summary.assert(Assertion::new(
        format!("{}.limit.j{}", lln.name, cfg.jmax),
        (mean_top / limit - 1.0).abs() <= lln.rel_tol,
        mean_top,
        format!("{limit}"),
        format!("relative {}", lln.rel_tol),
    ));
    summary.observe("oracle_limit", limit);
    Ok((summary, vec![data, plot], rows, limit))
}

pub fn run_lln_besov(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let lln = Lln { name: "lln_besov", kind: ShellKind::Narrow, p: 2.0, moment: 1.0, rel_tol: cfg.tolerances.lln_besov };
    let (mut summary, tables, _, _) = run_shell_lln(cfg, lln)?;
    let d = cfg.d as f64;
    summary.observe("reported_constant_half", (d / 2.0).exp2() - (-d / 2.0).exp2());
    summary.observe("reported_constant_three_halves", (1.5 * d).exp2() - (-1.5 * d).exp2());
    summary.observe("reported_c2d", ((1.5 * d).exp2() - (-1.5 * d).exp2()).sqrt());
    Ok(ExperimentOutput { summary: summary.finish(), tables })
}

pub fn run_lln_fb(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let p = cfg.p.get();
    if p.is_infinite() {
        return Err(AppError::Validation("lln_fb needs a finite p".into()));
    }
    let moment = gamma_moment(p)?.powf(p);
    let lln = Lln { name: "lln_fb", kind: ShellKind::Wide, p, moment, rel_tol: cfg.tolerances.lln_fb };
    let (mut summary, tables, rows, limit) = run_shell_lln(cfg, lln)?;
    let tol = &cfg.tolerances;
    let top = column(&rows, cfg.jmax as usize - 1);
    let inside = top.iter().filter(|v| (*v / limit - 1.0).abs() <= tol.lln_fb).count();
    let frac = inside as f64 / top.len() as f64;
    summary.assert(Assertion::new(
        format!("lln_fb.coverage.j{}", cfg.jmax),
        frac >= tol.coverage,
        frac,
        format!(">= {}", tol.coverage),
        format!("relative band {} around {limit}", tol.lln_fb),
    ));
    let d = cfg.d as f64;
    summary.observe("oracle_lower_bound", limit.powf(1.0 / p));
    summary.observe("reported_lower_bound", (d.exp2() - (-d).exp2()) * gamma_moment(p)?);
    Ok(ExperimentOutput { summary: summary.finish(), tables })
}
