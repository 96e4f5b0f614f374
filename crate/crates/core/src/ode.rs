//! Dormand-Prince 5(4) explicit Runge-Kutta integrator with step-size
//! control and continuous (dense) output, for autonomous systems
//! `y' = f(y)`.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output (Hairer, Norsett & Wanner, DOPRI5 contd5).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const MAX_STEPS: usize = 10_000_000;

/// Integrates from `times[0]` and returns the state at every entry of
/// `times`, which must be nondecreasing.
pub fn integrate_dense<F>(
    mut f: F,
    y0: &[f64],
    times: &[f64],
    tol: Tolerances,
) -> Result<(Vec<Vec<f64>>, Stats)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut out = Vec::with_capacity(times.len());
    let mut stats = Stats::default();
    let Some(&t0) = times.first() else {
        return Ok((out, stats));
    };
    let t_end = *times.last().unwrap();

    let mut y = y0.to_vec();
    let mut next = 0;
    while next < times.len() && times[next] <= t0 {
        out.push(y.clone());
        next += 1;
    }
    if next == times.len() {
        return Ok((out, stats));
    }

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut dense = vec![[0.0; 5]; dim];

    f(&y, &mut k1);
    stats.evaluations += 1;

    let norm = |v: &[f64], scale: &dyn Fn(usize) -> f64| -> f64 {
        (v.iter()
            .enumerate()
            .map(|(i, x)| (x / scale(i)).powi(2))
            .sum::<f64>()
            / dim.max(1) as f64)
            .sqrt()
    };

    // Initial step from the size of y and y'.
    let sc0 = |i: usize| tol.atol + tol.rtol * y[i].abs();
    let d0 = norm(&y, &sc0);
    let d1 = norm(&k1, &sc0);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(t_end - t0);

    let mut t = t0;
    let mut last_factor_rejected = false;
    while next < times.len() {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(Error::StepSizeUnderflow { t });
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        for i in 0..dim {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        f(&stage, &mut k2);
        for i in 0..dim {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(&stage, &mut k3);
        for i in 0..dim {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(&stage, &mut k4);
        for i in 0..dim {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(&stage, &mut k5);
        for i in 0..dim {
            stage[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(&stage, &mut k6);
        for i in 0..dim {
            y_new[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(&y_new, &mut k7);
        stats.evaluations += 6;

        let mut err_sq = 0.0;
        for i in 0..dim {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (err_sq / dim.max(1) as f64).sqrt();

        if err <= 1.0 {
            stats.accepted += 1;
            for i in 0..dim {
                let diff = y_new[i] - y[i];
                let bspl = h * k1[i] - diff;
                dense[i] = [
                    y[i],
                    diff,
                    bspl,
                    diff - h * k7[i] - bspl,
                    h * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]),
                ];
            }
            let t_new = if t + h >= t_end { t_end } else { t + h };
            while next < times.len() && times[next] <= t_new {
                if times[next] == t_new {
                    out.push(y_new.clone());
                } else {
                    let theta = (times[next] - t) / h;
                    let theta1 = 1.0 - theta;
                    out.push(
                        dense
                            .iter()
                            .map(|r| {
                                r[0] + theta
                                    * (r[1] + theta1 * (r[2] + theta * (r[3] + theta1 * r[4])))
                            })
                            .collect(),
                    );
                }
                next += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);

            let mut factor = if err == 0.0 {
                5.0
            } else {
                0.9 * err.powf(-0.2)
            };
            factor = factor.clamp(0.2, 5.0);
            if last_factor_rejected {
                factor = factor.min(1.0);
            }
            last_factor_rejected = false;
            h *= factor;
        } else {
            stats.rejected += 1;
            last_factor_rejected = true;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    Ok((out, stats))
}
