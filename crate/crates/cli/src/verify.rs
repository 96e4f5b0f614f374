use std::io::Write;

use anyhow::{Context, Result};
use bdp_core::analytic::{crossing_prob_const, transformed_crossing_prob_quadrature};
use bdp_core::solver::{convolve_renewal, fpt_numeric, solve_forward, time_grid};
use bdp_core::{NuSequence, ProcessSpec, RateKind, StateWindow};

use crate::commands::{build_nu, resolve_window};
use crate::config::{ExperimentConfig, NuMode};
use crate::fmt_f;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
}

impl ReportRow {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// Residual table of a verification run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    fn push(&mut self, check: impl Into<String>, value: f64, tolerance: f64) {
        self.rows.push(ReportRow {
            check: check.into(),
            value,
            tolerance,
        });
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(ReportRow::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "check,value,tolerance,status")?;
        for r in &self.rows {
            let status = if r.passed() { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "{},{},{},{status}",
                r.check,
                fmt_f(r.value),
                fmt_f(r.tolerance)
            )?;
        }
        Ok(())
    }
}

struct Pair<'a> {
    original: &'a ProcessSpec,
    transformed: &'a ProcessSpec,
    outer: StateWindow,
    inner: StateWindow,
    nu: &'a NuSequence,
}

fn transition_residual(cfg: &ExperimentConfig, pair: &Pair, times: &[f64]) -> Result<f64> {
    let p = solve_forward(pair.original, &pair.outer, cfg.k, times, cfg.rel_tol)
        .context("solving the original process")?;
    let pt = solve_forward(pair.transformed, &pair.inner, cfg.k, times, cfg.rel_tol)
        .context("solving the transformed process")?;
    let mut worst = 0.0_f64;
    for i in 0..times.len() {
        for n in pair.inner.states() {
            let predicted = pair.nu.ratio(cfg.k, n)? * p.prob(i, n).unwrap();
            worst = worst.max((pt.prob(i, n).unwrap() - predicted).abs());
        }
    }
    Ok(worst)
}

fn renewal_residual(
    cfg: &ExperimentConfig,
    spec: &ProcessSpec,
    window: &StateWindow,
    s: i64,
    n: i64,
) -> Result<f64> {
    let times = time_grid(cfg.t_max, cfg.renewal_grid)?;
    let g = fpt_numeric(spec, window, cfg.k, s, &times, cfg.rel_tol)?;
    let p_sn = solve_forward(spec, window, s, &times, cfg.rel_tol)?;
    let p_kn = solve_forward(spec, window, cfg.k, &[0.0, cfg.t_max], cfg.rel_tol)?;
    let conv = convolve_renewal(&g, &p_sn, n, cfg.t_max)?;
    Ok((conv - p_kn.prob(1, n).unwrap()).abs())
}

/// Builds nu, transforms, solves both processes independently and
/// tabulates the product-form residuals, the crossing comparison and a
/// renewal spot check.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let outer = resolve_window(cfg)?;
    let nu = build_nu(cfg, outer)?;
    let tp = bdp_core::transform::transform_process(&cfg.spec, &nu)
        .with_context(|| format!("transforming the process{}", cfg.location("nu_mode")))?;
    let inner = tp.window();
    let pair = Pair {
        original: &cfg.spec,
        transformed: tp.spec(),
        outer,
        inner,
        nu: &nu,
    };
    let (k, s) = (cfg.k, cfg.s());
    let at_k = cfg.location("k");
    let at_s = cfg.location("s");
    let mut report = Report::default();

    let times = time_grid(cfg.t_max, cfg.grid)?;
    report.push(
        "transition_product_form",
        transition_residual(cfg, &pair, &times)
            .with_context(|| format!("transition check{at_k}"))?,
        cfg.tol_transition,
    );

    let g = fpt_numeric(pair.original, &outer, k, s, &times, cfg.rel_tol)
        .with_context(|| format!("first-passage density of the original process{at_s}"))?;
    let gt = fpt_numeric(pair.transformed, &inner, k, s, &times, cfg.rel_tol)
        .with_context(|| format!("first-passage density of the transformed process{at_s}"))?;
    let ratio = nu.ratio(k, s)?;
    let fpt_worst = gt
        .density
        .iter()
        .zip(&g.density)
        .map(|(a, b)| (a - ratio * b).abs())
        .fold(0.0, f64::max);
    report.push("fpt_product_form", fpt_worst, cfg.tol_fpt);

    let absorbed = *g.absorbed_mass.last().unwrap();
    let absorbed_t = *gt.absorbed_mass.last().unwrap();
    report.push(
        "crossing_by_t_max_product_form",
        (absorbed_t - ratio * absorbed).abs(),
        cfg.tol_crossing,
    );

    // The closed forms apply when nu is the constant-ratio family of the
    // constant-rate process itself.
    if let (RateKind::Constant { lambda, mu }, Some(NuMode::ConstantRatio { c, beta })) =
        (cfg.spec.kind(), &cfg.nu)
    {
        if c.is_none_or(|c| c == mu / lambda) {
            let p = crossing_prob_const(*lambda, *mu, k, s)?;
            let q = transformed_crossing_prob_quadrature(*lambda, *mu, *beta, k, s)?;
            report.push(
                "ultimate_crossing_product_form",
                (q.value - ratio * p).abs(),
                cfg.tol_crossing,
            );
            report.push(
                "ultimate_crossing_at_most_one",
                (q.value - 1.0).max(0.0),
                cfg.tol_crossing,
            );
        }
    }

    let n = s + (s - k).signum();
    if inner.contains_interior(n) {
        report.push(
            "renewal_original",
            renewal_residual(cfg, pair.original, &outer, s, n)
                .context("renewal check, original process")?,
            cfg.tol_renewal,
        );
        report.push(
            "renewal_transformed",
            renewal_residual(cfg, pair.transformed, &inner, s, n)
                .context("renewal check, transformed process")?,
            cfg.tol_renewal,
        );
    }
    Ok(report)
}
