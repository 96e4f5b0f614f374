//! Similarity transformations between bilateral birth-death processes.
//!
//! A positive, strictly monotone sequence `nu_n` solving
//!
//! ```text
//! nu_{n+1} lambda_n - nu_n (lambda_n + mu_n) + nu_{n-1} mu_n = 0
//! ```
//!
//! turns a process with rates `(lambda_n, mu_n)` into one with rates
//! `lambda_n nu_{n+1} / nu_n` and `mu_n nu_{n-1} / nu_n`. The transition
//! probabilities, first-passage-time densities and ultimate crossing
//! probabilities of the two processes differ by the factor
//! `nu_target / nu_start`.
//!
//! Sequences only exist on a finite [`StateWindow`]. Positivity and
//! monotonicity outside the window are the caller's responsibility.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::model::{validate_spec, ProcessSpec, RateKind, StateWindow};

/// Residual tolerance factor, in units of machine epsilon times
/// `nu_n (lambda_n + mu_n)`.
pub const RESIDUAL_EPS_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Parameters a sequence was generated from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuOrigin {
    /// `nu_0` and first increment `d_0 = nu_1 - nu_0`.
    Recurrence { nu0: f64, d0: f64 },
    /// `nu_n = 1 + beta c^n`.
    ConstantRatio { beta: f64, c: f64 },
    /// Values supplied directly.
    Explicit,
}

/// A positive monotone sequence on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct NuSequence {
    window: StateWindow,
    values: Vec<f64>,
    /// `d_n = nu_{n+1} - nu_n` for `n_min <= n < n_max`, carried at higher
    /// precision than the rounded differences of `values`.
    increments: Vec<f64>,
    direction: Direction,
    origin: NuOrigin,
}

impl NuSequence {
    pub fn window(&self) -> StateWindow {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn origin(&self) -> NuOrigin {
        self.origin
    }

    pub fn is_increasing(&self) -> bool {
        self.direction == Direction::Increasing
    }

    pub fn value(&self, n: i64) -> Result<f64> {
        self.window
            .index(n)
            .map(|i| self.values[i])
            .ok_or(Error::OutOfDomain {
                n,
                n_min: self.window.n_min(),
                n_max: self.window.n_max(),
            })
    }

    /// `d_n = nu_{n+1} - nu_n`, defined for every state but the last.
    pub fn increment(&self, n: i64) -> Option<f64> {
        self.window
            .index(n)
            .and_then(|i| self.increments.get(i).copied())
    }

    /// `nu_n / nu_k`.
    pub fn ratio(&self, k: i64, n: i64) -> Result<f64> {
        Ok(self.value(n)? / self.value(k)?)
    }

    /// Sequence given by its values on `window`, which must be positive and
    /// strictly monotone.
    pub fn from_values(window: StateWindow, values: Vec<f64>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::Domain(format!(
                "{} nu values supplied for window {window} of {} states",
                values.len(),
                window.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NuNotPositive {
                    state: window.state(i),
                    value: v,
                });
            }
        }
        let direction = if values[1] > values[0] {
            Direction::Increasing
        } else {
            Direction::Decreasing
        };
        let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        for (i, d) in increments.iter().enumerate() {
            let ok = match direction {
                Direction::Increasing => *d > 0.0,
                Direction::Decreasing => *d < 0.0,
            };
            if !ok {
                return Err(Error::NuNotMonotone {
                    state: window.state(i + 1),
                });
            }
        }
        Ok(Self {
            window,
            values,
            increments,
            direction,
            origin: NuOrigin::Explicit,
        })
    }

    /// Residual of the three-term recurrence at interior state `n`, evaluated
    /// exactly enough that only the stored values contribute error.
    pub fn residual(&self, spec: &ProcessSpec, n: i64) -> Result<f64> {
        if !self.window.contains_interior(n) {
            return Err(Error::Domain(format!(
                "residual needs an interior state of {}, got {n}",
                self.window
            )));
        }
        let (lambda, mu) = spec.rates_at(n)?;
        let i = self.window.index(n).unwrap();
        let (up, mid, down) = (self.values[i + 1], self.values[i], self.values[i - 1]);
        let r = Dd::new(up) * Dd::new(lambda) - Dd::new(mid) * (Dd::new(lambda) + Dd::new(mu))
            + Dd::new(down) * Dd::new(mu);
        Ok(r.to_f64())
    }

    /// Admissible residual magnitude at `n`: `8 eps nu_n (lambda_n + mu_n)`.
    pub fn residual_bound(&self, spec: &ProcessSpec, n: i64) -> Result<f64> {
        let (lambda, mu) = spec.rates_at(n)?;
        Ok(RESIDUAL_EPS_FACTOR * f64::EPSILON * self.value(n)? * (lambda + mu))
    }

    /// Fails with the first interior state whose residual exceeds its bound.
    pub fn check_residuals(&self, spec: &ProcessSpec) -> Result<()> {
        for n in self.window.interior()?.states() {
            let residual = self.residual(spec, n)?;
            let bound = self.residual_bound(spec, n)?;
            if residual.is_nan() || residual.abs() > bound {
                return Err(Error::IncompatibleNu {
                    state: n,
                    residual,
                    bound,
                });
            }
        }
        Ok(())
    }
}

/// `mu_n / lambda_n` at double-double precision.
fn death_birth_ratio_dd(spec: &ProcessSpec, n: i64) -> Result<Dd> {
    if let RateKind::GeometricRatio { c, .. } = spec.kind() {
        spec.rates_at(n)?;
        return Ok(Dd::new(*c));
    }
    let (lambda, mu) = spec.rates_at(n)?;
    Ok(Dd::new(mu) / Dd::new(lambda))
}

/// Increment carried as `mantissa * 2^exp2` so that long products of rate
/// ratios can span more than the double range before being materialized.
#[derive(Clone, Copy)]
struct ScaledIncrement {
    mantissa: Dd,
    exp2: i32,
}

impl ScaledIncrement {
    const RESCALE: i32 = 512;

    fn new(d: f64) -> Self {
        Self {
            mantissa: Dd::new(d),
            exp2: 0,
        }
    }

    fn mul(&mut self, factor: Dd) {
        self.mantissa = self.mantissa * factor;
        let mag = self.mantissa.hi.abs();
        let big = 2f64.powi(Self::RESCALE);
        if mag > big {
            self.mantissa = self.mantissa * Dd::new(1.0 / big);
            self.exp2 += Self::RESCALE;
        } else if mag != 0.0 && mag < 1.0 / big {
            self.mantissa = self.mantissa * Dd::new(big);
            self.exp2 -= Self::RESCALE;
        }
    }

    fn div(&mut self, divisor: Dd) {
        self.mul(Dd::ONE / divisor);
    }

    fn materialize(&self) -> Dd {
        // Split the power of two so that neither factor over/underflows early.
        let half = self.exp2 / 2;
        let a = Dd::new(2f64.powi(half));
        let b = Dd::new(2f64.powi(self.exp2 - half));
        self.mantissa * a * b
    }
}

/// Solves the recurrence from `nu_0` and `d_0 = nu_1 - nu_0`.
///
/// Increments obey `d_n = (mu_n / lambda_n) d_{n-1}` going up from state 0
/// and the inverse relation going down. All increments share the sign of
/// `d_0`, so the sequence is increasing iff `d_0 > 0`.
pub fn build_nu_recurrence(
    spec: &ProcessSpec,
    window: StateWindow,
    nu0: f64,
    d0: f64,
) -> Result<NuSequence> {
    if !(nu0 > 0.0 && nu0.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "nu0",
            value: nu0,
            reason: "must be a positive finite number",
        });
    }
    if !d0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "d0",
            value: d0,
            reason: "must be finite",
        });
    }
    if d0 == 0.0 {
        return Err(Error::DegenerateIncrement);
    }
    let origin_index = window
        .index(0)
        .ok_or_else(|| Error::Domain(format!("window {window} must contain state 0")))?;
    validate_spec(spec, &window)?;

    let len = window.len();
    let mut nu = vec![Dd::new(0.0); len];
    let mut inc = vec![Dd::new(0.0); len - 1];
    nu[origin_index] = Dd::new(nu0);

    let check = |state: i64, v: Dd| -> Result<()> {
        let x = v.to_f64();
        if !x.is_finite() {
            Err(Error::NuOverflow { state })
        } else if x <= 0.0 {
            Err(Error::NuNotPositive { state, value: x })
        } else {
            Ok(())
        }
    };

    // Upward: nu_{n+1} = nu_n + d_n.
    let mut d = ScaledIncrement::new(d0);
    for i in origin_index..len - 1 {
        let n = window.state(i);
        if n > 0 {
            d.mul(death_birth_ratio_dd(spec, n)?);
        }
        let step = d.materialize();
        inc[i] = step;
        nu[i + 1] = nu[i] + step;
        check(n + 1, nu[i + 1])?;
    }

    // Downward: d_{n-1} = d_n / (mu_n / lambda_n), nu_{n-1} = nu_n - d_{n-1}.
    let mut d = ScaledIncrement::new(d0);
    for i in (1..=origin_index).rev() {
        let n = window.state(i);
        d.div(death_birth_ratio_dd(spec, n)?);
        let step = d.materialize();
        inc[i - 1] = step;
        nu[i - 1] = nu[i] - step;
        check(n - 1, nu[i - 1])?;
    }

    let direction = if d0 > 0.0 {
        Direction::Increasing
    } else {
        Direction::Decreasing
    };
    finish(
        window,
        &nu,
        &inc,
        direction,
        NuOrigin::Recurrence { nu0, d0 },
    )
}

/// `nu_n = 1 + beta c^n`, which solves the recurrence whenever
/// `mu_n = c lambda_n` at every state.
pub fn build_nu_constant_ratio(c: f64, beta: f64, window: StateWindow) -> Result<NuSequence> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
            reason: "must be a positive finite number",
        });
    }
    if c == 1.0 {
        return Err(Error::NoNonConstantSolution);
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must be a positive finite number",
        });
    }
    let cd = Dd::new(c);
    let nu: Vec<Dd> = window
        .states()
        .map(|n| Dd::ONE + Dd::new(beta) * cd.powi(n))
        .collect();
    for (i, v) in nu.iter().enumerate() {
        if !v.to_f64().is_finite() {
            return Err(Error::NuOverflow {
                state: window.state(i),
            });
        }
    }
    let inc: Vec<Dd> = nu.windows(2).map(|w| w[1] - w[0]).collect();
    let direction = if c > 1.0 {
        Direction::Increasing
    } else {
        Direction::Decreasing
    };
    finish(
        window,
        &nu,
        &inc,
        direction,
        NuOrigin::ConstantRatio { beta, c },
    )
}

fn finish(
    window: StateWindow,
    nu: &[Dd],
    inc: &[Dd],
    direction: Direction,
    origin: NuOrigin,
) -> Result<NuSequence> {
    let values: Vec<f64> = nu.iter().map(|v| v.to_f64()).collect();
    // Far from the origin increments can fall below one ulp of nu, so the
    // rounded values are only required to be weakly monotone.
    for (i, w) in values.windows(2).enumerate() {
        let ok = match direction {
            Direction::Increasing => w[1] >= w[0],
            Direction::Decreasing => w[1] <= w[0],
        };
        if !ok {
            return Err(Error::NuNotMonotone {
                state: window.state(i + 1),
            });
        }
    }
    Ok(NuSequence {
        window,
        values,
        increments: inc.iter().map(|d| d.to_f64()).collect(),
        direction,
        origin,
    })
}

/// The process obtained from `source` by a nu sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedProcess {
    spec: ProcessSpec,
    source: ProcessSpec,
    nu: NuSequence,
}

impl TransformedProcess {
    /// Transformed rates, tabulated on the interior of the nu window.
    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn source(&self) -> &ProcessSpec {
        &self.source
    }

    pub fn nu(&self) -> &NuSequence {
        &self.nu
    }

    /// States carrying transformed rates: the nu window minus its edges.
    pub fn window(&self) -> StateWindow {
        self.spec.domain().expect("transformed rates are tabulated")
    }
}

/// Rates `lambda_n nu_{n+1} / nu_n` and `mu_n nu_{n-1} / nu_n` on the
/// interior of the nu window.
pub fn transform_process(spec: &ProcessSpec, nu: &NuSequence) -> Result<TransformedProcess> {
    let window = nu.window();
    if !spec.covers(&window) {
        let domain = spec.domain().unwrap();
        let n = if window.n_min() < domain.n_min() {
            window.n_min()
        } else {
            window.n_max()
        };
        return Err(Error::OutOfDomain {
            n,
            n_min: domain.n_min(),
            n_max: domain.n_max(),
        });
    }
    validate_spec(spec, &window)?;
    nu.check_residuals(spec)?;

    let interior = window.interior()?;
    let rows = interior
        .states()
        .map(|n| {
            let (lambda, mu) = spec.rates_at(n)?;
            let here = nu.value(n)?;
            Ok((
                lambda * (nu.value(n + 1)? / here),
                mu * (nu.value(n - 1)? / here),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransformedProcess {
        spec: ProcessSpec::table(interior.n_min(), &rows)?,
        source: spec.clone(),
        nu: nu.clone(),
    })
}

/// Transition probability of the transformed process: `(nu_n / nu_k) p_kn`.
pub fn predict_transition(nu: &NuSequence, k: i64, n: i64, p_kn: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_kn) {
        return Err(Error::Domain(format!("probability {p_kn} outside [0, 1]")));
    }
    let ratio = nu.ratio(k, n)?;
    Ok(if k == n { p_kn } else { ratio * p_kn })
}

/// First-passage-time density of the transformed process:
/// `(nu_s / nu_k) g_ks`.
pub fn predict_fpt(nu: &NuSequence, k: i64, s: i64, g_ks: f64) -> Result<f64> {
    if k == s {
        return Err(Error::SameState { state: k });
    }
    if g_ks.is_nan() || g_ks < 0.0 {
        return Err(Error::Domain(format!("density {g_ks} is negative")));
    }
    Ok(nu.ratio(k, s)? * g_ks)
}

/// Ultimate crossing probability of the transformed process:
/// `(nu_s / nu_k) P_ks`, which must not exceed one.
pub fn predict_crossing(nu: &NuSequence, k: i64, s: i64, p_ks: f64) -> Result<f64> {
    if k == s {
        return Err(Error::SameState { state: k });
    }
    if !(0.0..=1.0).contains(&p_ks) {
        return Err(Error::Domain(format!("probability {p_ks} outside [0, 1]")));
    }
    let value = nu.ratio(k, s)? * p_ks;
    // Rounding slack for inputs sitting exactly on the boundary.
    if value > 1.0 + 4.0 * f64::EPSILON {
        return Err(Error::InconsistentCrossing { value });
    }
    Ok(value.min(1.0))
}
