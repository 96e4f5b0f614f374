//! Modified Bessel function of the first kind for integer order, evaluated
//! from its power series
//!
//! ```text
//! I_k(2z) = sum_{j >= 0} z^(k + 2j) / (j! (k + j)!)
//! ```
//!
//! All terms are positive, so the series has no cancellation; the only
//! hazard is the exponential growth of `I_k(x) ~ e^x`. The sum is carried
//! as `mantissa * exp(ln_scale)` with power-of-two rescaling, which keeps
//! the exponentially scaled product `e^{-x} I_k(x)` finite for any
//! argument.

use crate::error::{Error, Result};

/// Relative size of the last accepted term at which summation stops.
pub const SERIES_REL_TOL: f64 = 1e-16;

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 200_000;

/// Largest argument for which the unscaled value is returned.
pub const UNSCALED_MAX_ARG: f64 = 600.0;

const RESCALE_EXP2: i32 = 600;

/// One evaluation of `I_k(x)` with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: i64,
    pub argument: f64,
    pub value: f64,
    pub terms_used: usize,
    /// Bound on the neglected tail, relative to `value`.
    pub truncation_bound: f64,
}

/// Series sum represented as `mantissa * exp(ln_scale)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledSum {
    pub mantissa: f64,
    pub ln_scale: f64,
    pub terms: usize,
    pub tail_rel: f64,
}

impl ScaledSum {
    /// `ln` of the represented value.
    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.ln_scale
    }
}

fn check_argument(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Bessel argument must be finite and nonnegative, got {x}"
        )))
    }
}

pub(crate) fn series(order: i64, x: f64) -> Result<ScaledSum> {
    check_argument(x)?;
    let m = order.unsigned_abs();
    if x == 0.0 {
        return Ok(ScaledSum {
            mantissa: if m == 0 { 1.0 } else { 0.0 },
            ln_scale: 0.0,
            terms: 1,
            tail_rel: 0.0,
        });
    }

    let big = 2f64.powi(RESCALE_EXP2);
    let small = 1.0 / big;
    let step_ln = RESCALE_EXP2 as f64 * std::f64::consts::LN_2;
    let z = 0.5 * x;

    // Leading term z^m / m!.
    let mut term = 1.0_f64;
    let mut ln_scale = 0.0_f64;
    for j in 1..=m {
        term *= z / j as f64;
        if term < small {
            term *= big;
            ln_scale -= step_ln;
        } else if term > big {
            term *= small;
            ln_scale += step_ln;
        }
    }

    let z2 = z * z;
    let mf = m as f64;
    let mut sum = term;
    let mut terms = 1usize;
    let mut j = 0.0_f64;
    loop {
        let q = z2 / ((j + 1.0) * (mf + j + 1.0));
        term *= q;
        sum += term;
        terms += 1;
        j += 1.0;
        if sum > big {
            sum *= small;
            term *= small;
            ln_scale += step_ln;
        }
        let q_next = z2 / ((j + 1.0) * (mf + j + 1.0));
        if q_next < 1.0 && term <= SERIES_REL_TOL * sum {
            let tail = term * q_next / (1.0 - q_next);
            return Ok(ScaledSum {
                mantissa: sum,
                ln_scale,
                terms,
                tail_rel: tail / sum,
            });
        }
        if terms >= MAX_TERMS {
            return Err(Error::BesselNotConverged { order, x, terms });
        }
    }
}

/// `I_k(x)` with evaluation metadata, for `x < 600`.
pub fn bessel_i_eval(order: i64, x: f64) -> Result<BesselEval> {
    check_argument(x)?;
    if x >= UNSCALED_MAX_ARG {
        return Err(Error::Domain(format!(
            "unscaled I_k is limited to arguments below {UNSCALED_MAX_ARG}; use bessel_i_scaled for x = {x}"
        )));
    }
    let s = series(order, x)?;
    Ok(BesselEval {
        order,
        argument: x,
        value: s.mantissa * s.ln_scale.exp(),
        terms_used: s.terms,
        truncation_bound: s.tail_rel,
    })
}

/// `I_k(x)` for integer order `k` (negative orders use `I_{-k} = I_k`)
/// and `0 <= x < 600`.
pub fn bessel_i(order: i64, x: f64) -> Result<f64> {
    bessel_i_eval(order, x).map(|e| e.value)
}

/// Exponentially scaled `e^{-x} I_k(x)`, finite for every argument.
pub fn bessel_i_scaled(order: i64, x: f64) -> Result<f64> {
    let s = series(order, x)?;
    Ok(if s.ln_scale == 0.0 {
        s.mantissa * (-x).exp()
    } else {
        (s.ln() - x).exp()
    })
}
