//! Bilateral birth-death processes on the integer lattice.
//!
//! A process is described by its birth rates `lambda_n` and death rates
//! `mu_n`, both strictly positive at every state so that there are no
//! absorbing or reflecting states. Computations only ever see a finite
//! [`StateWindow`] of the lattice.
//!
//! Uniqueness of the forward solution (the process being "simple") is
//! assumed for every positive-rate specification, not checked.

use std::fmt;

use crate::error::{Error, Result};

/// Inclusive range of lattice states `n_min..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateWindow {
    n_min: i64,
    n_max: i64,
}

impl StateWindow {
    /// At least three states are required so the three-term recurrence can
    /// be evaluated somewhere inside.
    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        if n_min >= n_max {
            return Err(Error::InvalidWindow {
                n_min,
                n_max,
                reason: "n_min must be smaller than n_max",
            });
        }
        if n_max - n_min + 1 < 3 {
            return Err(Error::InvalidWindow {
                n_min,
                n_max,
                reason: "window must contain at least 3 states",
            });
        }
        Ok(Self { n_min, n_max })
    }

    /// Symmetric window `[center - half_width, center + half_width]`.
    pub fn around(center: i64, half_width: i64) -> Result<Self> {
        Self::new(center - half_width, center + half_width)
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.n_min..=self.n_max).contains(&n)
    }

    /// Strictly inside: not one of the two edge states.
    pub fn contains_interior(&self, n: i64) -> bool {
        n > self.n_min && n < self.n_max
    }

    /// Position of `n` in a dense array over the window.
    pub fn index(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n - self.n_min) as usize)
    }

    pub fn state(&self, index: usize) -> i64 {
        self.n_min + index as i64
    }

    pub fn states(&self) -> impl DoubleEndedIterator<Item = i64> + Clone {
        self.n_min..=self.n_max
    }

    /// The window with both edge states removed.
    pub fn interior(&self) -> Result<Self> {
        Self::new(self.n_min + 1, self.n_max - 1)
    }

    pub fn is_subset_of(&self, other: &StateWindow) -> bool {
        self.n_min >= other.n_min && self.n_max <= other.n_max
    }
}

impl fmt::Display for StateWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.n_min, self.n_max)
    }
}

/// How the rates of a process are assigned over the lattice.
#[derive(Debug, Clone, PartialEq)]
pub enum RateKind {
    /// State-independent rates.
    Constant { lambda: f64, mu: f64 },
    /// Dense per-state rates over `domain`.
    Table {
        domain: StateWindow,
        lambda: Vec<f64>,
        mu: Vec<f64>,
    },
    /// Dense birth rates over `domain` with `mu_n = c * lambda_n`.
    GeometricRatio {
        domain: StateWindow,
        lambda: Vec<f64>,
        c: f64,
    },
    /// Constant rates `lambda`, `mu` transformed by `nu_n = 1 + beta c^n`
    /// with `c = mu / lambda`, evaluated lazily on all of the lattice.
    TransformedConstant { lambda: f64, mu: f64, beta: f64 },
}

/// A validated bilateral birth-death process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    kind: RateKind,
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a positive finite number",
        })
    }
}

impl ProcessSpec {
    pub fn constant(lambda: f64, mu: f64) -> Result<Self> {
        Self::from_kind(RateKind::Constant { lambda, mu })
    }

    /// Per-state table starting at `n_min`; `rows[i]` holds the rates of
    /// state `n_min + i`.
    pub fn table(n_min: i64, rows: &[(f64, f64)]) -> Result<Self> {
        let domain = StateWindow::new(n_min, n_min + rows.len() as i64 - 1)?;
        Self::from_kind(RateKind::Table {
            domain,
            lambda: rows.iter().map(|r| r.0).collect(),
            mu: rows.iter().map(|r| r.1).collect(),
        })
    }

    /// Table from explicit `(n, lambda_n, mu_n)` rows, which must cover a
    /// contiguous range of states (in any order, without duplicates).
    pub fn table_from_rows(rows: &[(i64, f64, f64)]) -> Result<Self> {
        let mut sorted = rows.to_vec();
        sorted.sort_by_key(|r| r.0);
        if sorted.is_empty() {
            return Err(Error::Domain("rate table has no rows".into()));
        }
        for pair in sorted.windows(2) {
            if pair[1].0 != pair[0].0 + 1 {
                return Err(Error::Domain(format!(
                    "rate table rows must cover contiguous states; gap or duplicate after state {}",
                    pair[0].0
                )));
            }
        }
        let dense: Vec<(f64, f64)> = sorted.iter().map(|r| (r.1, r.2)).collect();
        Self::table(sorted[0].0, &dense)
    }

    pub fn geometric_ratio(n_min: i64, lambda: &[f64], c: f64) -> Result<Self> {
        check_positive("c", c)?;
        let domain = StateWindow::new(n_min, n_min + lambda.len() as i64 - 1)?;
        Self::from_kind(RateKind::GeometricRatio {
            domain,
            lambda: lambda.to_vec(),
            c,
        })
    }

    /// Closed-form transform of the constant-rate process by
    /// `nu_n = 1 + beta (mu/lambda)^n`.
    pub fn transformed_constant(lambda: f64, mu: f64, beta: f64) -> Result<Self> {
        Self::from_kind(RateKind::TransformedConstant { lambda, mu, beta })
    }

    /// Validates eagerly: every defined rate must be strictly positive.
    pub fn from_kind(kind: RateKind) -> Result<Self> {
        match &kind {
            RateKind::Constant { lambda, mu } => {
                check_positive("lambda", *lambda)?;
                check_positive("mu", *mu)?;
            }
            RateKind::TransformedConstant { lambda, mu, beta } => {
                check_positive("lambda", *lambda)?;
                check_positive("mu", *mu)?;
                check_positive("beta", *beta)?;
                if lambda == mu {
                    return Err(Error::NoNonConstantSolution);
                }
            }
            RateKind::Table { domain, lambda, mu } => {
                if lambda.len() != domain.len() || mu.len() != domain.len() {
                    return Err(Error::Domain(
                        "rate table length does not match its domain".into(),
                    ));
                }
            }
            RateKind::GeometricRatio { domain, lambda, c } => {
                check_positive("c", *c)?;
                if lambda.len() != domain.len() {
                    return Err(Error::Domain(
                        "rate table length does not match its domain".into(),
                    ));
                }
            }
        }
        let spec = Self { kind };
        if let Some(domain) = spec.domain() {
            validate_spec(&spec, &domain)?;
        }
        Ok(spec)
    }

    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    /// States on which the rates are defined; `None` for closed-form kinds
    /// that cover the whole lattice.
    pub fn domain(&self) -> Option<StateWindow> {
        match &self.kind {
            RateKind::Table { domain, .. } | RateKind::GeometricRatio { domain, .. } => {
                Some(*domain)
            }
            RateKind::Constant { .. } | RateKind::TransformedConstant { .. } => None,
        }
    }

    pub fn covers(&self, window: &StateWindow) -> bool {
        self.domain().is_none_or(|d| window.is_subset_of(&d))
    }

    /// `(lambda_n, mu_n)` at state `n`.
    pub fn rates_at(&self, n: i64) -> Result<(f64, f64)> {
        match &self.kind {
            RateKind::Constant { lambda, mu } => Ok((*lambda, *mu)),
            RateKind::Table { domain, lambda, mu } => {
                let i = table_index(domain, n)?;
                Ok((lambda[i], mu[i]))
            }
            RateKind::GeometricRatio { domain, lambda, c } => {
                let i = table_index(domain, n)?;
                Ok((lambda[i], c * lambda[i]))
            }
            RateKind::TransformedConstant { lambda, mu, beta } => {
                let c = mu / lambda;
                Ok((
                    lambda * nu_ratio(*beta, c, n + 1, n),
                    mu * nu_ratio(*beta, c, n - 1, n),
                ))
            }
        }
    }

    /// `mu_n / lambda_n`; exact for the geometric-ratio kind.
    pub fn death_birth_ratio(&self, n: i64) -> Result<f64> {
        match &self.kind {
            RateKind::GeometricRatio { domain, c, .. } => {
                table_index(domain, n)?;
                Ok(*c)
            }
            _ => {
                let (lambda, mu) = self.rates_at(n)?;
                Ok(mu / lambda)
            }
        }
    }

    /// Largest total exit rate `lambda_n + mu_n` over the window.
    pub fn max_exit_rate(&self, window: &StateWindow) -> Result<f64> {
        window.states().try_fold(0.0_f64, |acc, n| {
            let (l, m) = self.rates_at(n)?;
            Ok(acc.max(l + m))
        })
    }

    /// Dense table of this process restricted to `window`.
    pub fn to_table(&self, window: &StateWindow) -> Result<ProcessSpec> {
        let rows = window
            .states()
            .map(|n| self.rates_at(n))
            .collect::<Result<Vec<_>>>()?;
        ProcessSpec::table(window.n_min(), &rows)
    }
}

fn table_index(domain: &StateWindow, n: i64) -> Result<usize> {
    domain.index(n).ok_or(Error::OutOfDomain {
        n,
        n_min: domain.n_min(),
        n_max: domain.n_max(),
    })
}

/// `(1 + beta c^a) / (1 + beta c^b)` for `|a - b| <= 1` without overflowing
/// `c^b` far out on the lattice.
pub(crate) fn nu_ratio(beta: f64, c: f64, a: i64, b: i64) -> f64 {
    let ln_c = c.ln();
    let xb = beta.ln() + b as f64 * ln_c;
    let shift = (a - b) as f64 * ln_c;
    if xb > 0.0 {
        let inv = (-xb).exp();
        (inv + shift.exp()) / (inv + 1.0)
    } else {
        let eb = xb.exp();
        (1.0 + eb * shift.exp()) / (1.0 + eb)
    }
}

/// Checks strict positivity of every rate on `window`, reporting every
/// offending state.
pub fn validate_spec<'a>(spec: &'a ProcessSpec, window: &StateWindow) -> Result<&'a ProcessSpec> {
    let mut bad = Vec::new();
    for n in window.states() {
        let (lambda, mu) = spec.rates_at(n)?;
        if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
            bad.push(n);
        }
    }
    if bad.is_empty() {
        Ok(spec)
    } else {
        Err(Error::NonPositiveRates { states: bad })
    }
}
