use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use bdp_core::analytic::{
    fpt_density_const_continuous, transformed_fpt_const_continuous, transformed_transition_const,
    transition_prob_const,
};
use bdp_core::simulate::{default_horizon, estimate_fpt, estimate_transition, McOptions};
use bdp_core::solver::{
    auto_half_width, fpt_numeric, solve_forward, solve_forward_auto, time_grid,
};
use bdp_core::transform::{build_nu_constant_ratio, build_nu_recurrence, transform_process};
use bdp_core::{
    Error, FptDensity, NuSequence, ProcessSpec, RateKind, StateWindow, TransformedProcess,
};

use crate::config::{ExperimentConfig, NuMode, SpecText};
use crate::fmt_f;

fn clip(spec: &ProcessSpec, w: StateWindow) -> Result<StateWindow> {
    Ok(match spec.domain() {
        Some(d) => StateWindow::new(w.n_min().max(d.n_min()), w.n_max().min(d.n_max()))?,
        None => w,
    })
}

/// Automatic half width around `center`, iterated until the exit-rate
/// bound it depends on is settled.
fn auto_half(spec: &ProcessSpec, center: i64, t_max: f64) -> Result<i64> {
    let mut half = auto_half_width(t_max, 0.0);
    loop {
        let w = clip(spec, StateWindow::around(center, half)?)?;
        let next = auto_half_width(t_max, spec.max_exit_rate(&w)?);
        if next <= half {
            return Ok(half);
        }
        half = next;
    }
}

/// The configured window, else the rate table domain, else an automatic
/// window around `k` wide enough for `t_max` and one extra state per side.
pub fn resolve_window(cfg: &ExperimentConfig) -> Result<StateWindow> {
    if let Some(w) = cfg.window {
        return Ok(w);
    }
    if let Some(NuMode::Explicit { n_min, values }) = &cfg.nu {
        return Ok(StateWindow::new(*n_min, n_min + values.len() as i64 - 1)?);
    }
    if let Some(d) = cfg.spec.domain() {
        return Ok(d);
    }
    let reach = (cfg.n() - cfg.k).abs().max((cfg.s() - cfg.k).abs());
    let half = auto_half(&cfg.spec, cfg.k, cfg.t_max)?.max(reach + 2) + 1;
    Ok(StateWindow::around(cfg.k, half)?)
}

/// Builds the configured nu sequence on `window`.
pub fn build_nu(cfg: &ExperimentConfig, window: StateWindow) -> Result<NuSequence> {
    let mode = cfg
        .nu
        .as_ref()
        .ok_or_else(|| anyhow!("no nu sequence configured: set nu_mode"))?;
    let at = cfg.location("nu_mode");
    let nu = match mode {
        NuMode::ConstantRatio { c, beta } => {
            let c = match (c, cfg.spec.kind()) {
                (Some(c), _) => *c,
                (None, RateKind::Constant { lambda, mu }) => mu / lambda,
                (None, RateKind::GeometricRatio { c, .. }) => *c,
                (None, _) => bail!("nu_mode = constant_ratio needs `c` for this process{at}"),
            };
            build_nu_constant_ratio(c, *beta, window)
        }
        NuMode::Recurrence { nu0, d0 } => build_nu_recurrence(&cfg.spec, window, *nu0, *d0),
        NuMode::Explicit { values, .. } => NuSequence::from_values(window, values.clone()),
    };
    nu.with_context(|| format!("building the nu sequence on {window}{at}"))
}

pub fn build_transform(cfg: &ExperimentConfig) -> Result<TransformedProcess> {
    let window = resolve_window(cfg)?;
    let nu = build_nu(cfg, window)?;
    transform_process(&cfg.spec, &nu)
        .with_context(|| format!("transforming the process{}", cfg.location("nu_mode")))
}

pub fn run_nu(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let window = resolve_window(cfg)?;
    let nu = build_nu(cfg, window)?;
    writeln!(out, "n,nu,d,residual")?;
    for n in window.states() {
        let d = nu.increment(n).map(fmt_f).unwrap_or_default();
        let r = if window.contains_interior(n) {
            fmt_f(nu.residual(&cfg.spec, n)?)
        } else {
            String::new()
        };
        writeln!(out, "{n},{},{d},{r}", fmt_f(nu.value(n)?))?;
    }
    Ok(())
}

pub fn run_transform(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let tp = build_transform(cfg)?;
    writeln!(out, "# transformed process on {}", tp.window())?;
    write!(
        out,
        "{}",
        SpecText {
            spec: tp.spec(),
            window: Some(tp.window()),
        }
    )?;
    Ok(())
}

pub fn run_solve(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let times = time_grid(cfg.t_max, cfg.grid)?;
    let slice = match cfg.window {
        Some(w) => solve_forward(&cfg.spec, &w, cfg.k, &times, cfg.rel_tol),
        None => solve_forward_auto(&cfg.spec, cfg.k, &times, cfg.rel_tol),
    }
    .context("solving the forward equations")?;
    writeln!(out, "t,n,p")?;
    for (i, t) in times.iter().enumerate() {
        for (j, p) in slice.values[i].iter().enumerate() {
            writeln!(out, "{},{},{}", fmt_f(*t), slice.window.state(j), fmt_f(*p))?;
        }
    }
    Ok(())
}

/// First-passage density on the configured window, or on an automatic
/// window that doubles until the far-edge leak is negligible.
pub fn fpt_on(
    spec: &ProcessSpec,
    window: Option<StateWindow>,
    k: i64,
    s: i64,
    times: &[f64],
    rel_tol: f64,
) -> Result<FptDensity> {
    if let Some(w) = window {
        return Ok(fpt_numeric(spec, &w, k, s, times, rel_tol)?);
    }
    let t_max = *times.last().unwrap();
    let mut half = auto_half(spec, k, t_max)?.max((s - k).abs() + 1);
    loop {
        let w = clip(spec, StateWindow::around(k, half)?)?;
        match fpt_numeric(spec, &w, k, s, times, rel_tol) {
            Err(Error::WindowTooSmall { .. }) if spec.domain() != Some(w) => half *= 2,
            other => return Ok(other?),
        }
    }
}

pub fn run_fpt(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let times = time_grid(cfg.t_max, cfg.grid)?;
    let g = fpt_on(&cfg.spec, cfg.window, cfg.k, cfg.s(), &times, cfg.rel_tol)
        .context("computing the first-passage density")?;
    writeln!(out, "t,g,absorbed_mass")?;
    for ((t, d), m) in times.iter().zip(&g.density).zip(&g.absorbed_mass) {
        writeln!(out, "{},{},{}", fmt_f(*t), fmt_f(*d), fmt_f(*m))?;
    }
    Ok(())
}

fn mc_options(cfg: &ExperimentConfig) -> McOptions {
    let opts = McOptions::new(cfg.trials, cfg.seed);
    match cfg.threads {
        Some(t) => opts.with_threads(t),
        None => opts,
    }
}

/// With a target `s`: first-passage histogram on `out` and the crossing
/// summary on `summary`. Without: the empirical law of `X(t_max)`.
pub fn run_simulate(
    cfg: &ExperimentConfig,
    out: &mut dyn Write,
    summary: &mut dyn Write,
) -> Result<()> {
    let opts = mc_options(cfg);
    let Some(s) = cfg.s else {
        let dist = estimate_transition(&cfg.spec, cfg.k, cfg.t_max, &opts)?;
        writeln!(out, "n,frequency,std_error")?;
        for &n in dist.counts.keys() {
            writeln!(
                out,
                "{n},{},{}",
                fmt_f(dist.frequency(n)),
                fmt_f(dist.std_error(n, None))
            )?;
        }
        return Ok(());
    };
    let t_end = cfg
        .horizon
        .or_else(|| default_horizon(&cfg.spec))
        .unwrap_or(cfg.t_max);
    let (hist, est) = estimate_fpt(&cfg.spec, cfg.k, s, t_end, cfg.bins, &opts)?;
    writeln!(out, "bin_center,density")?;
    for (c, d) in hist.bin_centers().iter().zip(&hist.density) {
        writeln!(out, "{},{}", fmt_f(*c), fmt_f(*d))?;
    }
    writeln!(
        summary,
        "point,ci_half_width,censored_fraction,hits,trials,horizon"
    )?;
    writeln!(
        summary,
        "{},{},{},{},{},{}",
        fmt_f(est.point),
        fmt_f(est.ci_half_width),
        fmt_f(est.censored_fraction),
        est.hits,
        est.trials,
        fmt_f(est.horizon)
    )?;
    Ok(())
}

pub fn run_example(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let RateKind::Constant { lambda, mu } = *cfg.spec.kind() else {
        bail!("the example needs kind = constant");
    };
    let beta = match &cfg.nu {
        Some(NuMode::ConstantRatio { c: None, beta }) => *beta,
        Some(NuMode::ConstantRatio { c: Some(c), beta }) if *c == mu / lambda => *beta,
        None => 1.0,
        Some(_) => bail!("the example uses nu_mode = constant_ratio with c = mu / lambda"),
    };
    let (k, n) = (cfg.k, cfg.n());
    let times = time_grid(cfg.t_max, cfg.grid)?;
    writeln!(out, "t,p,p_tilde,g,g_tilde,ratio")?;
    for t in times {
        let p = transition_prob_const(lambda, mu, k, n, t)?;
        let pt = transformed_transition_const(lambda, mu, beta, k, n, t)?;
        let (g, gt) = if k == n {
            (String::new(), String::new())
        } else {
            (
                fmt_f(fpt_density_const_continuous(lambda, mu, k, n, t)?),
                fmt_f(transformed_fpt_const_continuous(lambda, mu, beta, k, n, t)?),
            )
        };
        let ratio = if p > 0.0 {
            fmt_f(pt / p)
        } else {
            String::new()
        };
        writeln!(
            out,
            "{},{},{},{g},{gt},{ratio}",
            fmt_f(t),
            fmt_f(p),
            fmt_f(pt)
        )?;
    }
    Ok(())
}
