//! Closed forms for the constant-rate bilateral process and its transform.
//!
//! With `lambda_n = lambda` and `mu_n = mu` everywhere,
//!
//! ```text
//! p_{k,n}(t) = e^{-(lambda+mu) t} (lambda/mu)^{(n-k)/2} I_{n-k}(2 t sqrt(lambda mu))
//! g_{k,s}(t) = |s-k| / t * p_{k,s}(t)
//! ```
//!
//! and for `lambda != mu` the sequence `nu_n = 1 + beta c^n`, `c = mu/lambda`,
//! yields a transformed process whose probabilities and densities carry the
//! extra factor `nu_target / nu_start`.

pub mod bessel;
pub mod quadrature;

pub use bessel::{bessel_i, bessel_i_eval, bessel_i_scaled, BesselEval};
pub use quadrature::{integrate, QuadratureResult};

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Absolute tolerance of the crossing-probability quadrature.
pub const CROSSING_QUAD_TOL: f64 = 1e-10;

/// Upper limit cap for the crossing-probability quadrature.
pub const CROSSING_QUAD_MAX_T: f64 = 1e4;

fn check_rates(lambda: f64, mu: f64) -> Result<()> {
    for (name, v) in [("lambda", lambda), ("mu", mu)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                reason: "must be a positive finite number",
            });
        }
    }
    Ok(())
}

fn check_transform_params(lambda: f64, mu: f64, beta: f64) -> Result<f64> {
    check_rates(lambda, mu)?;
    if lambda == mu {
        return Err(Error::NoNonConstantSolution);
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must be a positive finite number",
        });
    }
    Ok(mu / lambda)
}

/// `e^{-(lambda+mu) t} (lambda/mu)^{m/2} I_m(2 t sqrt(lambda mu))` for
/// `t > 0`, through the scaled Bessel product:
/// `e^{-(lambda+mu)t} I_m(x) = e^{-(sqrt(lambda)-sqrt(mu))^2 t} e^{-x} I_m(x)`.
fn const_kernel(lambda: f64, mu: f64, m: i64, t: f64) -> Result<f64> {
    let x = 2.0 * t * (lambda * mu).sqrt();
    let s = bessel::series(m, x)?;
    if s.mantissa == 0.0 {
        return Ok(0.0);
    }
    let gap = lambda.sqrt() - mu.sqrt();
    let ln_decay = -gap * gap * t;
    let ln_ratio = 0.5 * m as f64 * (lambda / mu).ln();

    if s.ln_scale == 0.0 && x < 700.0 && ln_ratio.abs() < 700.0 {
        let scaled = s.mantissa * (-x).exp();
        let direct = scaled * ln_decay.exp() * (lambda / mu).powf(0.5 * m as f64);
        if direct.is_normal() {
            return Ok(direct);
        }
    }
    Ok((s.ln() - x + ln_decay + ln_ratio).exp())
}

/// Transition probability `p_{k,n}(t)` of the constant-rate process.
pub fn transition_prob_const(lambda: f64, mu: f64, k: i64, n: i64, t: f64) -> Result<f64> {
    check_rates(lambda, mu)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    const_kernel(lambda, mu, n - k, t)
}

/// First-passage-time density `g_{k,s}(t) = |s-k|/t p_{k,s}(t)` for `t > 0`.
pub fn fpt_density_const(lambda: f64, mu: f64, k: i64, s: i64, t: f64) -> Result<f64> {
    if k == s {
        return Err(Error::SameState { state: k });
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "first-passage density needs t > 0, got {t}"
        )));
    }
    let p = transition_prob_const(lambda, mu, k, s, t)?;
    Ok((s - k).unsigned_abs() as f64 / t * p)
}

/// Like [`fpt_density_const`] but extended to `t = 0` by continuity:
/// `lambda` for `s = k + 1`, `mu` for `s = k - 1`, zero otherwise.
pub fn fpt_density_const_continuous(lambda: f64, mu: f64, k: i64, s: i64, t: f64) -> Result<f64> {
    if t == 0.0 {
        check_rates(lambda, mu)?;
        return match s - k {
            0 => Err(Error::SameState { state: k }),
            1 => Ok(lambda),
            -1 => Ok(mu),
            _ => Ok(0.0),
        };
    }
    fpt_density_const(lambda, mu, k, s, t)
}

/// `(1 + beta c^n) / (1 + beta c^k)`, rounded once.
pub fn closed_form_nu_ratio(beta: f64, c: f64, k: i64, n: i64) -> f64 {
    let cd = Dd::new(c);
    let b = Dd::new(beta);
    let num = Dd::ONE + b * cd.powi(n);
    let den = Dd::ONE + b * cd.powi(k);
    (num / den).to_f64()
}

/// Transition probability of the transformed constant-rate process:
/// `(1+beta c^n)/(1+beta c^k) e^{-(lambda+mu)t} c^{(k-n)/2} I_{n-k}(2t sqrt(lambda mu))`.
pub fn transformed_transition_const(
    lambda: f64,
    mu: f64,
    beta: f64,
    k: i64,
    n: i64,
    t: f64,
) -> Result<f64> {
    let c = check_transform_params(lambda, mu, beta)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    // c^{(k-n)/2} = (lambda/mu)^{(n-k)/2}
    let kernel = const_kernel(lambda, mu, n - k, t)?;
    Ok(if k == n {
        kernel
    } else {
        closed_form_nu_ratio(beta, c, k, n) * kernel
    })
}

/// First-passage-time density of the transformed constant-rate process.
pub fn transformed_fpt_const(
    lambda: f64,
    mu: f64,
    beta: f64,
    k: i64,
    s: i64,
    t: f64,
) -> Result<f64> {
    let c = check_transform_params(lambda, mu, beta)?;
    let g = fpt_density_const(lambda, mu, k, s, t)?;
    Ok(closed_form_nu_ratio(beta, c, k, s) * g)
}

/// [`transformed_fpt_const`] extended to `t = 0` by continuity.
pub fn transformed_fpt_const_continuous(
    lambda: f64,
    mu: f64,
    beta: f64,
    k: i64,
    s: i64,
    t: f64,
) -> Result<f64> {
    let c = check_transform_params(lambda, mu, beta)?;
    let g = fpt_density_const_continuous(lambda, mu, k, s, t)?;
    Ok(closed_form_nu_ratio(beta, c, k, s) * g)
}

/// Gambler's-ruin probability of ever reaching `s` from `k` for the
/// constant-rate walk: `min(1, (lambda/mu)^{s-k})` upwards and
/// `min(1, (mu/lambda)^{k-s})` downwards.
pub fn crossing_prob_const(lambda: f64, mu: f64, k: i64, s: i64) -> Result<f64> {
    check_rates(lambda, mu)?;
    if k == s {
        return Err(Error::SameState { state: k });
    }
    let (ratio, steps) = if s > k {
        (lambda / mu, s - k)
    } else {
        (mu / lambda, k - s)
    };
    Ok(ratio.powf(steps as f64).min(1.0))
}

/// Upper integration limit `50 / (sqrt(lambda) - sqrt(mu))^2`, capped at 1e4.
pub fn crossing_quadrature_horizon(lambda: f64, mu: f64) -> f64 {
    let gap = lambda.sqrt() - mu.sqrt();
    let t = 50.0 / (gap * gap);
    if t.is_finite() {
        t.min(CROSSING_QUAD_MAX_T)
    } else {
        CROSSING_QUAD_MAX_T
    }
}

/// Ultimate crossing probability `int_0^inf g_{k,s}(t) dt` by quadrature.
pub fn crossing_prob_quadrature(lambda: f64, mu: f64, k: i64, s: i64) -> Result<QuadratureResult> {
    check_rates(lambda, mu)?;
    let horizon = crossing_quadrature_horizon(lambda, mu);
    integrate(
        |t| fpt_density_const_continuous(lambda, mu, k, s, t),
        0.0,
        horizon,
        CROSSING_QUAD_TOL,
        4_000,
    )
}

/// Ultimate crossing probability of the transformed process by quadrature
/// of its own density.
pub fn transformed_crossing_prob_quadrature(
    lambda: f64,
    mu: f64,
    beta: f64,
    k: i64,
    s: i64,
) -> Result<QuadratureResult> {
    check_transform_params(lambda, mu, beta)?;
    let horizon = crossing_quadrature_horizon(lambda, mu);
    integrate(
        |t| transformed_fpt_const_continuous(lambda, mu, beta, k, s, t),
        0.0,
        horizon,
        CROSSING_QUAD_TOL,
        4_000,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_condition() {
        assert_eq!(transition_prob_const(1.0, 2.0, 3, 3, 0.0).unwrap(), 1.0);
        assert_eq!(transition_prob_const(1.0, 2.0, 3, 4, 0.0).unwrap(), 0.0);
        assert_eq!(
            transformed_transition_const(1.0, 2.0, 1.0, 0, 1, 0.0).unwrap(),
            0.0
        );
        assert_eq!(
            transformed_transition_const(1.0, 2.0, 1.0, 2, 2, 0.0).unwrap(),
            1.0
        );
    }

    #[test]
    fn stays_at_origin_value() {
        let p = transition_prob_const(1.0, 2.0, 0, 0, 1.0).unwrap();
        let want = (-3.0_f64).exp() * bessel_i(0, 2.0 * 2f64.sqrt()).unwrap();
        assert!((p - want).abs() <= 4.0 * f64::EPSILON * want);
    }

    #[test]
    fn normalization() {
        let total: f64 = (-60..=60)
            .map(|n| transition_prob_const(1.0, 2.0, 0, n, 1.0).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn fpt_is_ratio_times_transition() {
        let g = fpt_density_const(1.0, 2.0, 0, 3, 2.0).unwrap();
        let p = transition_prob_const(1.0, 2.0, 0, 3, 2.0).unwrap();
        assert_eq!(g, 1.5 * p);
        assert!(fpt_density_const(1.0, 2.0, 0, 0, 1.0).is_err());
        assert!(fpt_density_const(1.0, 2.0, 0, 1, 0.0).is_err());
    }

    #[test]
    fn density_limit_at_zero() {
        assert_eq!(
            fpt_density_const_continuous(1.0, 2.0, 0, 1, 0.0).unwrap(),
            1.0
        );
        assert_eq!(
            fpt_density_const_continuous(1.0, 2.0, 0, -1, 0.0).unwrap(),
            2.0
        );
        assert_eq!(
            fpt_density_const_continuous(1.0, 2.0, 0, 2, 0.0).unwrap(),
            0.0
        );
        let near = fpt_density_const(1.0, 2.0, 0, 1, 1e-9).unwrap();
        assert!((near - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gamblers_ruin_oracle() {
        assert_eq!(crossing_prob_const(1.5, 1.5, 0, 7).unwrap(), 1.0);
        assert_eq!(crossing_prob_const(1.0, 2.0, 0, 1).unwrap(), 0.5);
        assert_eq!(crossing_prob_const(1.0, 2.0, 0, -2).unwrap(), 1.0);
        assert_eq!(crossing_prob_const(2.0, 1.0, 0, -2).unwrap(), 0.25);
    }

    #[test]
    fn transformed_requires_asymmetric_rates() {
        assert_eq!(
            transformed_transition_const(1.0, 1.0, 1.0, 0, 1, 1.0),
            Err(Error::NoNonConstantSolution)
        );
        assert!(transformed_fpt_const(1.0, 2.0, 0.0, 0, 1, 1.0).is_err());
    }

    #[test]
    fn transformed_value_by_substitution() {
        let got = transformed_transition_const(1.0, 2.0, 1.0, 0, 1, 1.0).unwrap();
        let want =
            1.5 * (-3.0_f64).exp() * 2f64.powf(-0.5) * bessel_i(1, 2.0 * 2f64.sqrt()).unwrap();
        assert!((got - want).abs() <= 4.0 * f64::EPSILON * want);
    }

    #[test]
    fn large_time_uses_log_path() {
        // x = 2t sqrt(2) well beyond the exp range.
        let p = transition_prob_const(1.0, 2.0, 0, -300, 300.0).unwrap();
        assert!(p.is_finite() && p > 0.0 && p < 1.0);
        let total: f64 = (-900..=300)
            .map(|n| transition_prob_const(1.0, 2.0, 0, n, 300.0).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }
}
