//! Numerical solution of the truncated forward (Kolmogorov) equations
//!
//! ```text
//! d/dt p_{k,n} = lambda_{n-1} p_{k,n-1} - (lambda_n + mu_n) p_{k,n} + mu_{n+1} p_{k,n+1}
//! ```
//!
//! on a finite window with `p_{k,n}(0) = delta_{kn}`. The window edges are
//! killing: probability flowing out of the window is removed and tracked
//! as a deficit, which bounds the truncation error.
//!
//! First-passage densities come from the same system with the target state
//! made absorbing; the density is the instantaneous inflow into it.

use crate::error::{Error, Result};
use crate::model::{validate_spec, ProcessSpec, StateWindow};
use crate::ode::{integrate_dense, Stats, Tolerances};

pub const MIN_REL_TOL: f64 = 1e-13;
pub const MAX_REL_TOL: f64 = 1e-6;

/// Tridiagonal generator of the truncated forward system on a contiguous
/// range of states.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    n_min: i64,
    birth: Vec<f64>,
    death: Vec<f64>,
}

impl Generator {
    fn from_range(spec: &ProcessSpec, n_min: i64, n_max: i64) -> Result<Self> {
        let (birth, death) = (n_min..=n_max)
            .map(|n| spec.rates_at(n))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Ok(Self {
            n_min,
            birth,
            death,
        })
    }

    pub fn len(&self) -> usize {
        self.birth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.birth.is_empty()
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.len() as i64 - 1
    }

    /// `-(lambda_n + mu_n)` per state.
    pub fn diagonal(&self) -> Vec<f64> {
        self.birth
            .iter()
            .zip(&self.death)
            .map(|(l, m)| -(l + m))
            .collect()
    }

    /// Entry `(n, n-1)`: inflow from below at rate `lambda_{n-1}`.
    pub fn sub_diagonal(&self) -> &[f64] {
        &self.birth[..self.len() - 1]
    }

    /// Entry `(n, n+1)`: inflow from above at rate `mu_{n+1}`.
    pub fn super_diagonal(&self) -> &[f64] {
        &self.death[1..]
    }

    /// Column sums of the operator: zero inside, `-lambda_{n_max}` and
    /// `-mu_{n_min}` on the edge columns (the flux leaving the window).
    pub fn column_sums(&self) -> Vec<f64> {
        let len = self.len();
        let diag = self.diagonal();
        (0..len)
            .map(|j| {
                let mut s = diag[j];
                if j + 1 < len {
                    s += self.birth[j];
                }
                if j > 0 {
                    s += self.death[j];
                }
                s
            })
            .collect()
    }

    /// `dp = A p`.
    pub fn apply(&self, p: &[f64], dp: &mut [f64]) {
        let len = self.len();
        for i in 0..len {
            let mut v = -(self.birth[i] + self.death[i]) * p[i];
            if i > 0 {
                v += self.birth[i - 1] * p[i - 1];
            }
            if i + 1 < len {
                v += self.death[i + 1] * p[i + 1];
            }
            dp[i] = v;
        }
    }

    /// Flux out of the upper edge, `lambda_{n_max} p_{n_max}`.
    pub fn upper_outflow(&self, p: &[f64]) -> f64 {
        self.birth[self.len() - 1] * p[self.len() - 1]
    }

    /// Flux out of the lower edge, `mu_{n_min} p_{n_min}`.
    pub fn lower_outflow(&self, p: &[f64]) -> f64 {
        self.death[0] * p[0]
    }
}

/// Assembles the killing-boundary generator on `window`.
pub fn build_generator(spec: &ProcessSpec, window: &StateWindow) -> Result<Generator> {
    validate_spec(spec, window)?;
    Generator::from_range(spec, window.n_min(), window.n_max())
}

/// `p_{k,n}(t)` on a window for a fixed start state and time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSlice {
    pub window: StateWindow,
    pub k: i64,
    pub times: Vec<f64>,
    /// `values[i][j]` is `p_{k, n_min + j}(times[i])`.
    pub values: Vec<Vec<f64>>,
    /// Mass lost through the window edges by each time.
    pub deficit: Vec<f64>,
    /// Most negative raw value before clamping to zero (0 if none).
    pub undershoot: f64,
    pub stats: Stats,
}

impl TransitionSlice {
    pub fn prob(&self, time_index: usize, n: i64) -> Option<f64> {
        let j = self.window.index(n)?;
        self.values.get(time_index).map(|row| row[j])
    }

    /// Total probability left inside the window at a grid time.
    pub fn mass(&self, time_index: usize) -> f64 {
        self.values[time_index].iter().sum()
    }
}

/// First-passage-time density from `k` to `s` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FptDensity {
    pub k: i64,
    pub s: i64,
    pub times: Vec<f64>,
    pub density: Vec<f64>,
    /// Probability of having reached `s` by each time.
    pub absorbed_mass: Vec<f64>,
    /// `1 - absorbed_mass` at the final time.
    pub censored_mass: f64,
    /// Mass lost through the far truncation edge by the final time.
    pub deficit: f64,
    pub stats: Stats,
}

/// Uniform grid of `points` times on `[0, t_max]`.
pub fn time_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Grid(format!("t_max must be positive, got {t_max}")));
    }
    if points < 2 {
        return Err(Error::Grid("a grid needs at least 2 points".into()));
    }
    let h = t_max / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i == points - 1 { t_max } else { i as f64 * h })
        .collect())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Grid("empty time grid".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::Grid(format!(
            "time grid must start at 0, got {}",
            times[0]
        )));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Grid("time grid contains non-finite values".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("time grid must be strictly increasing".into()));
    }
    Ok(())
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if (MIN_REL_TOL..=MAX_REL_TOL).contains(&rel_tol) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "rel_tol",
            value: rel_tol,
            reason: "must lie in [1e-13, 1e-6]",
        })
    }
}

fn check_interior(window: &StateWindow, n: i64, what: &str) -> Result<()> {
    if window.contains_interior(n) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what} state {n} must lie strictly inside the window {window}"
        )))
    }
}

fn tolerances(rel_tol: f64) -> Tolerances {
    Tolerances {
        rtol: rel_tol,
        atol: rel_tol,
    }
}

/// Clamps negative round-off to zero, returning the most negative value seen.
fn clamp_negative(values: &mut [f64]) -> f64 {
    let mut worst = 0.0_f64;
    for v in values.iter_mut() {
        if *v < 0.0 {
            worst = worst.min(*v);
            *v = 0.0;
        }
    }
    worst
}

/// Integrates the truncated forward system from `p(0) = e_k`.
pub fn solve_forward(
    spec: &ProcessSpec,
    window: &StateWindow,
    k: i64,
    times: &[f64],
    rel_tol: f64,
) -> Result<TransitionSlice> {
    check_times(times)?;
    check_rel_tol(rel_tol)?;
    check_interior(window, k, "initial")?;
    let gen = build_generator(spec, window)?;
    let len = gen.len();

    // State vector: probabilities followed by the accumulated deficit.
    let mut y0 = vec![0.0; len + 1];
    y0[window.index(k).unwrap()] = 1.0;
    let (ys, stats) = integrate_dense(
        |y, dy| {
            gen.apply(&y[..len], &mut dy[..len]);
            dy[len] = gen.upper_outflow(&y[..len]) + gen.lower_outflow(&y[..len]);
        },
        &y0,
        times,
        tolerances(rel_tol),
    )?;

    let mut values = Vec::with_capacity(ys.len());
    let mut deficit = Vec::with_capacity(ys.len());
    let mut undershoot = 0.0_f64;
    let mut running = 0.0_f64;
    for mut y in ys {
        let d = y.pop().unwrap();
        undershoot = undershoot.min(clamp_negative(&mut y));
        running = running.max(d);
        deficit.push(running);
        values.push(y);
    }
    Ok(TransitionSlice {
        window: *window,
        k,
        times: times.to_vec(),
        values,
        deficit,
        undershoot,
        stats,
    })
}

/// Half-width `ceil(8 + 6 t_max r / 2)` of the automatic window, where `r`
/// is the largest exit rate.
pub fn auto_half_width(t_max: f64, max_exit_rate: f64) -> i64 {
    (8.0 + 3.0 * t_max * max_exit_rate).ceil() as i64
}

/// Window `[k - m, k + m]` from [`auto_half_width`], widened until the
/// deficit at the final time drops below `rel_tol`.
pub fn solve_forward_auto(
    spec: &ProcessSpec,
    k: i64,
    times: &[f64],
    rel_tol: f64,
) -> Result<TransitionSlice> {
    check_times(times)?;
    let t_max = *times.last().unwrap();
    let domain = spec.domain();
    let clip = |w: StateWindow| -> Result<StateWindow> {
        match domain {
            Some(d) => StateWindow::new(w.n_min().max(d.n_min()), w.n_max().min(d.n_max())),
            None => Ok(w),
        }
    };

    // The exit rate depends on the window, so settle the half width first.
    let mut half = auto_half_width(t_max, 0.0);
    loop {
        let w = clip(StateWindow::around(k, half)?)?;
        let next = auto_half_width(t_max, spec.max_exit_rate(&w)?);
        if next <= half {
            break;
        }
        half = next;
    }
    loop {
        let w = clip(StateWindow::around(k, half)?)?;
        let slice = solve_forward(spec, &w, k, times, rel_tol)?;
        let deficit = *slice.deficit.last().unwrap();
        if deficit < rel_tol {
            return Ok(slice);
        }
        if let Some(d) = domain {
            if w.n_min() == d.n_min() && w.n_max() == d.n_max() {
                return Err(Error::WindowTooSmall {
                    deficit,
                    limit: rel_tol,
                });
            }
        }
        half *= 2;
    }
}

/// First-passage-time density from `k` to `s` with `s` absorbing.
///
/// States beyond `s` cannot be visited before the first passage, so only
/// the side of the window containing `k` is integrated; its edge next to
/// `s` feeds the absorbed mass and the far edge is killing.
pub fn fpt_numeric(
    spec: &ProcessSpec,
    window: &StateWindow,
    k: i64,
    s: i64,
    times: &[f64],
    rel_tol: f64,
) -> Result<FptDensity> {
    if k == s {
        return Err(Error::SameState { state: k });
    }
    check_times(times)?;
    check_rel_tol(rel_tol)?;
    check_interior(window, k, "initial")?;
    check_interior(window, s, "target")?;
    validate_spec(spec, window)?;

    let upward = s > k;
    let gen = if upward {
        Generator::from_range(spec, window.n_min(), s - 1)?
    } else {
        Generator::from_range(spec, s + 1, window.n_max())?
    };
    let len = gen.len();
    let start = (k - gen.n_min()) as usize;
    let inflow = |p: &[f64]| {
        if upward {
            gen.upper_outflow(p)
        } else {
            gen.lower_outflow(p)
        }
    };
    let leak = |p: &[f64]| {
        if upward {
            gen.lower_outflow(p)
        } else {
            gen.upper_outflow(p)
        }
    };

    // State vector: probabilities, absorbed mass, far-edge deficit.
    let mut y0 = vec![0.0; len + 2];
    y0[start] = 1.0;
    let (ys, stats) = integrate_dense(
        |y, dy| {
            let p = &y[..len];
            gen.apply(p, &mut dy[..len]);
            dy[len] = inflow(p);
            dy[len + 1] = leak(p);
        },
        &y0,
        times,
        tolerances(rel_tol),
    )?;

    let mut density = Vec::with_capacity(ys.len());
    let mut absorbed_mass = Vec::with_capacity(ys.len());
    let mut running = 0.0_f64;
    for y in &ys {
        density.push(inflow(&y[..len]).max(0.0));
        running = running.max(y[len]).min(1.0);
        absorbed_mass.push(running);
    }
    let deficit = ys.last().map(|y| y[len + 1]).unwrap_or(0.0);
    let limit = 10.0 * rel_tol;
    if deficit > limit {
        return Err(Error::WindowTooSmall { deficit, limit });
    }
    Ok(FptDensity {
        k,
        s,
        times: times.to_vec(),
        density,
        censored_mass: 1.0 - running,
        absorbed_mass,
        deficit,
        stats,
    })
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Grid(
            "convolution needs at least 2 grid points".into(),
        ));
    }
    let h = times[1] - times[0];
    for (i, t) in times.iter().enumerate() {
        if (t - (times[0] + i as f64 * h)).abs() > 1e-9 * h.max(t.abs()) {
            return Err(Error::Grid("convolution needs a uniform time grid".into()));
        }
    }
    Ok(h)
}

/// Trapezoid-rule value of `int_0^t g_{k,s}(theta) p_{s,n}(t - theta) dtheta`.
///
/// The renewal identity equates this with `p_{k,n}(t)` when
/// `k < s <= n` or `n <= s < k`.
pub fn convolve_renewal(g: &FptDensity, p: &TransitionSlice, n: i64, t: f64) -> Result<f64> {
    let (k, s) = (g.k, g.s);
    if p.k != s {
        return Err(Error::Grid(format!(
            "transition slice starts at {} but the density targets {s}",
            p.k
        )));
    }
    if !((k < s && s <= n) || (n <= s && s < k)) {
        return Err(Error::Domain(format!(
            "renewal identity needs k < s <= n or n <= s < k, got k={k}, s={s}, n={n}"
        )));
    }
    if g.times.len() != p.times.len()
        || g.times
            .iter()
            .zip(&p.times)
            .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return Err(Error::Grid(
            "density and transition slice use different grids".into(),
        ));
    }
    let h = uniform_step(&g.times)?;
    let j = ((t - g.times[0]) / h).round();
    if j < 0.0 || j as usize >= g.times.len() || (g.times[j as usize] - t).abs() > 1e-9 * h.max(t) {
        return Err(Error::Grid(format!("t = {t} is not a grid point")));
    }
    let j = j as usize;
    let col = p.window.index(n).ok_or(Error::OutOfDomain {
        n,
        n_min: p.window.n_min(),
        n_max: p.window.n_max(),
    })?;
    if j == 0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for i in 0..=j {
        let w = if i == 0 || i == j { 0.5 } else { 1.0 };
        acc += w * g.density[i] * p.values[j - i][col];
    }
    Ok(acc * h)
}
