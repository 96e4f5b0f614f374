#![allow(dead_code)]

use bdp_core::transform::build_nu_recurrence;
use bdp_core::{Error, NuSequence, ProcessSpec, StateWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn window(a: i64, b: i64) -> StateWindow {
    StateWindow::new(a, b).unwrap()
}

/// Table with rates drawn uniformly from `[lo, hi]` on `window`.
pub fn random_table(rng: &mut ChaCha8Rng, window: StateWindow, lo: f64, hi: f64) -> ProcessSpec {
    let rows: Vec<(f64, f64)> = window
        .states()
        .map(|_| (rng.random_range(lo..=hi), rng.random_range(lo..=hi)))
        .collect();
    ProcessSpec::table(window.n_min(), &rows).unwrap()
}

/// Recurrence-built sequence with `nu_0 = 1` and a random-sign first
/// increment, halved until the sequence stays positive on the window.
pub fn random_recurrence_nu(
    rng: &mut ChaCha8Rng,
    spec: &ProcessSpec,
    window: StateWindow,
) -> NuSequence {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut d0 = sign * rng.random_range(0.1..1.0);
    loop {
        match build_nu_recurrence(spec, window, 1.0, d0) {
            Ok(nu) => return nu,
            Err(Error::NuNotPositive { .. }) => d0 *= 0.5,
            Err(e) => panic!("unexpected error building nu: {e}"),
        }
    }
}

/// Maximum absolute difference over paired slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
