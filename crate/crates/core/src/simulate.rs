//! Exact path simulation and Monte Carlo estimators.
//!
//! Paths are generated jump by jump: the holding time in state `n` is
//! exponential with rate `lambda_n + mu_n`, and the jump goes up with
//! probability `lambda_n / (lambda_n + mu_n)`.
//!
//! Every trial draws from its own ChaCha8 stream, selected by the trial
//! index under the master seed, so aggregate results are bit-identical
//! for any number of worker threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ProcessSpec, RateKind};

/// Jump skeleton of one path on `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub jump_times: Vec<f64>,
    /// `states[0]` is the start state; `states[i + 1]` is entered at
    /// `jump_times[i]`.
    pub states: Vec<i64>,
    pub t_end: f64,
}

impl Trajectory {
    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    pub fn final_state(&self) -> i64 {
        *self.states.last().unwrap()
    }

    /// State occupied at time `t`.
    pub fn state_at(&self, t: f64) -> i64 {
        let idx = self.jump_times.partition_point(|&jt| jt <= t);
        self.states[idx]
    }
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl McOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            threads: None,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

/// Random stream of trial `trial` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Lazily filled dense rate lookup around the states a worker visits.
struct RateCache<'a> {
    spec: &'a ProcessSpec,
    lo: i64,
    rates: Vec<Option<(f64, f64)>>,
}

impl<'a> RateCache<'a> {
    fn new(spec: &'a ProcessSpec) -> Self {
        Self {
            spec,
            lo: 0,
            rates: Vec::new(),
        }
    }

    #[inline]
    fn get(&mut self, n: i64) -> Result<(f64, f64)> {
        if let RateKind::Constant { lambda, mu } = self.spec.kind() {
            return Ok((*lambda, *mu));
        }
        let off = n - self.lo;
        if off >= 0 && (off as usize) < self.rates.len() {
            if let Some(r) = self.rates[off as usize] {
                return Ok(r);
            }
        } else {
            self.grow(n);
        }
        let r = self.spec.rates_at(n)?;
        let i = (n - self.lo) as usize;
        self.rates[i] = Some(r);
        Ok(r)
    }

    fn grow(&mut self, n: i64) {
        if self.rates.is_empty() {
            self.lo = n - 64;
            self.rates = vec![None; 129];
            return;
        }
        let hi = self.lo + self.rates.len() as i64 - 1;
        let span = self.rates.len() as i64;
        let new_lo = if n < self.lo {
            n.min(self.lo - span)
        } else {
            self.lo
        };
        let new_hi = if n > hi { n.max(hi + span) } else { hi };
        let mut grown = vec![None; (new_hi - new_lo + 1) as usize];
        let shift = (self.lo - new_lo) as usize;
        grown[shift..shift + self.rates.len()].copy_from_slice(&self.rates);
        self.lo = new_lo;
        self.rates = grown;
    }
}

/// Uniform on `(0, 1]`, safe for `ln`.
#[inline]
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// One jump from `n`: holding time and direction.
#[inline]
fn jump<R: Rng>(cache: &mut RateCache<'_>, n: i64, rng: &mut R) -> Result<(f64, i64)> {
    let (lambda, mu) = cache.get(n)?;
    let total = lambda + mu;
    let dt = -open_unit(rng).ln() / total;
    let up = rng.random::<f64>() * total < lambda;
    Ok((dt, if up { n + 1 } else { n - 1 }))
}

fn check_horizon(t_end: f64) -> Result<()> {
    if t_end > 0.0 && t_end.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "must be positive and finite",
        })
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::InvalidParameter {
            name: "trials",
            value: 0.0,
            reason: "at least one trial is required",
        })
    } else {
        Ok(())
    }
}

/// Simulates one path from `k` on `[0, t_end]`, using stream 0 of `seed`.
pub fn simulate_path(spec: &ProcessSpec, k: i64, t_end: f64, seed: u64) -> Result<Trajectory> {
    check_horizon(t_end)?;
    let mut rng = trial_rng(seed, 0);
    let mut cache = RateCache::new(spec);
    let mut t = 0.0;
    let mut n = k;
    let mut jump_times = Vec::new();
    let mut states = vec![k];
    loop {
        let (dt, next) = jump(&mut cache, n, &mut rng)?;
        t += dt;
        if t > t_end {
            break;
        }
        n = next;
        jump_times.push(t);
        states.push(n);
    }
    Ok(Trajectory {
        seed,
        jump_times,
        states,
        t_end,
    })
}

fn state_at_time<R: Rng>(
    cache: &mut RateCache<'_>,
    k: i64,
    t_end: f64,
    rng: &mut R,
) -> Result<i64> {
    let mut t = 0.0;
    let mut n = k;
    loop {
        let (dt, next) = jump(cache, n, rng)?;
        t += dt;
        if t > t_end {
            return Ok(n);
        }
        n = next;
    }
}

fn first_passage<R: Rng>(
    cache: &mut RateCache<'_>,
    k: i64,
    s: i64,
    horizon: f64,
    rng: &mut R,
) -> Result<Option<f64>> {
    let mut t = 0.0;
    let mut n = k;
    loop {
        let (dt, next) = jump(cache, n, rng)?;
        t += dt;
        if t > horizon {
            return Ok(None);
        }
        n = next;
        if n == s {
            return Ok(Some(t));
        }
    }
}

/// Runs `op` in a dedicated pool when a thread count is requested.
fn in_pool<T: Send>(threads: Option<usize>, op: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(op()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Domain(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(op))
        }
    }
}

/// Empirical distribution of `X_t` given `X_0 = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    pub k: i64,
    pub t: f64,
    pub trials: u64,
    pub counts: BTreeMap<i64, u64>,
}

impl EmpiricalDistribution {
    pub fn frequency(&self, n: i64) -> f64 {
        self.counts.get(&n).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    /// Binomial standard error of [`frequency`](Self::frequency), using
    /// the reference probability `p` when given.
    pub fn std_error(&self, n: i64, p: Option<f64>) -> f64 {
        let p = p.unwrap_or_else(|| self.frequency(n));
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Monte Carlo estimate of `p_{k,n}(t)` for all visited `n`.
pub fn estimate_transition(
    spec: &ProcessSpec,
    k: i64,
    t: f64,
    opts: &McOptions,
) -> Result<EmpiricalDistribution> {
    check_trials(opts.trials)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "must be finite and nonnegative",
        });
    }
    let mut counts = BTreeMap::new();
    if t == 0.0 {
        counts.insert(k, opts.trials);
        return Ok(EmpiricalDistribution {
            k,
            t,
            trials: opts.trials,
            counts,
        });
    }
    let seed = opts.seed;
    let counts = in_pool(opts.threads, || {
        (0..opts.trials)
            .into_par_iter()
            .map_init(
                || RateCache::new(spec),
                |cache, i| state_at_time(cache, k, t, &mut trial_rng(seed, i)),
            )
            .try_fold(BTreeMap::new, |mut acc: BTreeMap<i64, u64>, n| {
                *acc.entry(n?).or_insert(0) += 1;
                Ok::<_, Error>(acc)
            })
            .try_reduce(BTreeMap::new, |mut a, b| {
                for (n, c) in b {
                    *a.entry(n).or_insert(0) += c;
                }
                Ok(a)
            })
    })??;
    Ok(EmpiricalDistribution {
        k,
        t,
        trials: opts.trials,
        counts,
    })
}

/// Histogram estimate of a (possibly defective) first-passage density.
#[derive(Debug, Clone, PartialEq)]
pub struct FptHistogram {
    pub k: i64,
    pub s: i64,
    pub t_end: f64,
    pub trials: u64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// `count / (trials * bin_width)`: integrates to the hit fraction.
    pub density: Vec<f64>,
}

impl FptHistogram {
    pub fn bin_centers(&self) -> Vec<f64> {
        (0..self.counts.len())
            .map(|i| (i as f64 + 0.5) * self.bin_width)
            .collect()
    }

    /// Total histogram mass, the fraction of paths that hit by `t_end`.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width
    }
}

/// Finite-horizon estimate of the ultimate crossing probability.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingEstimate {
    pub k: i64,
    pub s: i64,
    pub hits: u64,
    pub trials: u64,
    pub horizon: f64,
    pub point: f64,
    /// 95% normal-approximation half width, `1.96 sqrt(p (1-p) / trials)`.
    pub ci_half_width: f64,
    /// Fraction of paths that had not reached `s` by the horizon.
    pub censored_fraction: f64,
    /// Set when some paths were censored, so `point` is a lower bound.
    pub censored: bool,
}

impl CrossingEstimate {
    pub fn std_error(&self) -> f64 {
        (self.point * (1.0 - self.point) / self.trials as f64).sqrt()
    }
}

/// Records the first hitting time of `s` from `k` on every path, censored
/// at `t_end`.
pub fn estimate_fpt(
    spec: &ProcessSpec,
    k: i64,
    s: i64,
    t_end: f64,
    bins: usize,
    opts: &McOptions,
) -> Result<(FptHistogram, CrossingEstimate)> {
    if k == s {
        return Err(Error::SameState { state: k });
    }
    check_horizon(t_end)?;
    check_trials(opts.trials)?;
    if bins == 0 {
        return Err(Error::InvalidParameter {
            name: "bins",
            value: 0.0,
            reason: "at least one bin is required",
        });
    }
    let width = t_end / bins as f64;
    let seed = opts.seed;
    let counts = in_pool(opts.threads, || {
        (0..opts.trials)
            .into_par_iter()
            .map_init(
                || RateCache::new(spec),
                |cache, i| first_passage(cache, k, s, t_end, &mut trial_rng(seed, i)),
            )
            .try_fold(
                || vec![0u64; bins],
                |mut acc, hit| {
                    if let Some(t) = hit? {
                        let b = ((t / width) as usize).min(bins - 1);
                        acc[b] += 1;
                    }
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || vec![0u64; bins],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )
    })??;

    let trials = opts.trials;
    let hits: u64 = counts.iter().sum();
    let density = counts
        .iter()
        .map(|&c| c as f64 / (trials as f64 * width))
        .collect();
    let point = hits as f64 / trials as f64;
    let histogram = FptHistogram {
        k,
        s,
        t_end,
        trials,
        bin_width: width,
        counts,
        density,
    };
    let estimate = CrossingEstimate {
        k,
        s,
        hits,
        trials,
        horizon: t_end,
        point,
        ci_half_width: 1.96 * (point * (1.0 - point) / trials as f64).sqrt(),
        censored_fraction: 1.0 - point,
        censored: hits < trials,
    };
    Ok((histogram, estimate))
}

/// Default crossing horizon `50 / |ln(lambda/mu)|` for constant rates.
pub fn default_horizon(spec: &ProcessSpec) -> Option<f64> {
    match spec.kind() {
        RateKind::Constant { lambda, mu } if lambda != mu => Some(50.0 / (lambda / mu).ln().abs()),
        _ => None,
    }
}
