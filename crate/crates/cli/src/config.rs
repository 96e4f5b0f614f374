//! Plain-text experiment configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Lines without
//! `=` are table rows:
//!
//! ```text
//! n lambda mu        rate table row (kind = table)
//! n lambda           birth-rate row (kind = geometric_ratio)
//! nu n value         explicit nu entry (nu_mode = explicit)
//! ```
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `spec_file` | read the process keys and rows from another file | |
//! | `kind` | `constant`, `table` or `geometric_ratio` | `constant` |
//! | `lambda`, `mu` | constant rates | |
//! | `c` | `mu_n / lambda_n` (geometric_ratio), or the nu ratio | |
//! | `nu_mode` | `constant_ratio`, `recurrence` or `explicit` | |
//! | `beta` | closed-form nu coefficient, `> 0` | |
//! | `nu0`, `d0` | recurrence start value and increment | `1`, |
//! | `window` | `n_min n_max` | auto |
//! | `k`, `n`, `s` | start, end and target states | `0`, `k+1`, `k+1` |
//! | `t_max`, `grid` | time grid `[0, t_max]` with `grid` points | `1`, `200` |
//! | `rel_tol` | solver tolerance | `1e-10` |
//! | `trials`, `seed`, `threads`, `bins`, `horizon` | Monte Carlo | `100000`, `42`, all cores, `50`, auto |
//! | `renewal_grid` | points of the renewal-check grid | `2001` |
//! | `tol_transition`, `tol_fpt`, `tol_crossing`, `tol_renewal` | verify tolerances | `1e-8`, `1e-6`, `1e-6`, `1e-6` |
//! | `output` | output path instead of stdout | |

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use bdp_core::solver::{MAX_REL_TOL, MIN_REL_TOL};
use bdp_core::{ProcessSpec, StateWindow};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    Duplicate {
        line: usize,
        key: String,
        first: usize,
    },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    Type {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("line {line}: `{key}` {message}")]
    Range {
        line: usize,
        key: String,
        message: String,
    },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("line {line}: {source}")]
    Process {
        line: usize,
        #[source]
        source: bdp_core::Error,
    },
}

type Result<T> = std::result::Result<T, ConfigError>;

/// How the nu sequence is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum NuMode {
    Recurrence {
        nu0: f64,
        d0: f64,
    },
    /// `nu_n = 1 + beta c^n`; `c = None` takes the ratio from the process.
    ConstantRatio {
        c: Option<f64>,
        beta: f64,
    },
    Explicit {
        n_min: i64,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: ProcessSpec,
    pub nu: Option<NuMode>,
    pub window: Option<StateWindow>,
    pub k: i64,
    pub n: Option<i64>,
    pub s: Option<i64>,
    pub t_max: f64,
    pub grid: usize,
    pub rel_tol: f64,
    pub trials: u64,
    pub seed: u64,
    pub threads: Option<usize>,
    pub bins: usize,
    pub horizon: Option<f64>,
    pub renewal_grid: usize,
    pub tol_transition: f64,
    pub tol_fpt: f64,
    pub tol_crossing: f64,
    pub tol_renewal: f64,
    pub output: Option<PathBuf>,
    /// Line on which each key was set, for error context.
    pub lines: HashMap<String, usize>,
}

impl ExperimentConfig {
    /// Defaults around a given process.
    pub fn new(spec: ProcessSpec) -> Self {
        Self {
            spec,
            nu: None,
            window: None,
            k: 0,
            n: None,
            s: None,
            t_max: 1.0,
            grid: 200,
            rel_tol: 1e-10,
            trials: 100_000,
            seed: 42,
            threads: None,
            bins: 50,
            horizon: None,
            renewal_grid: 2001,
            tol_transition: 1e-8,
            tol_fpt: 1e-6,
            tol_crossing: 1e-6,
            tol_renewal: 1e-6,
            output: None,
            lines: HashMap::new(),
        }
    }

    pub fn n(&self) -> i64 {
        self.n.unwrap_or(self.k + 1)
    }

    pub fn s(&self) -> i64 {
        self.s.unwrap_or(self.k + 1)
    }

    /// `" (config line N: key)"` when `key` came from the file.
    pub fn location(&self, key: &str) -> String {
        match self.lines.get(key) {
            Some(line) => format!(" (config line {line}: {key})"),
            None => String::new(),
        }
    }
}

const KEYS: &[&str] = &[
    "spec_file",
    "kind",
    "lambda",
    "mu",
    "c",
    "nu_mode",
    "beta",
    "nu0",
    "d0",
    "window",
    "k",
    "n",
    "s",
    "t_max",
    "grid",
    "rel_tol",
    "trials",
    "seed",
    "threads",
    "bins",
    "horizon",
    "renewal_grid",
    "tol_transition",
    "tol_fpt",
    "tol_crossing",
    "tol_renewal",
    "output",
];

const PROCESS_KEYS: &[&str] = &["kind", "lambda", "mu", "c"];

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

#[derive(Debug, Default)]
struct RawConfig {
    entries: HashMap<String, Entry>,
    rate_rows: Vec<(usize, Vec<f64>, i64)>,
    nu_rows: Vec<(usize, i64, f64)>,
}

fn parse_number<T: std::str::FromStr>(
    line: usize,
    key: &str,
    value: &str,
    expected: &'static str,
) -> Result<T> {
    value.parse().map_err(|_| ConfigError::Type {
        line,
        key: key.to_string(),
        expected,
        value: value.to_string(),
    })
}

fn parse_raw(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let content = full.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        if let Some((key, value)) = content.split_once('=') {
            let key = key.trim();
            let value = value.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("`{key}` has no value"),
                });
            }
            if let Some(first) = raw.entries.get(key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                    first: first.line,
                });
            }
            raw.entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
            continue;
        }

        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields[0] == "nu" {
            if fields.len() != 3 {
                return Err(ConfigError::Syntax {
                    line,
                    message: "nu rows have the form `nu n value`".into(),
                });
            }
            let n = parse_number(line, "nu row", fields[1], "an integer state")?;
            let v = parse_number(line, "nu row", fields[2], "a number")?;
            raw.nu_rows.push((line, n, v));
            continue;
        }
        if !(2..=3).contains(&fields.len()) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("expected `key = value` or a row `n lambda mu`, got `{content}`"),
            });
        }
        let n = match fields[0].parse::<i64>() {
            Ok(n) => n,
            Err(_) => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: fields[0].to_string(),
                })
            }
        };
        let rates = fields[1..]
            .iter()
            .map(|f| parse_number(line, "rate row", f, "a number"))
            .collect::<Result<Vec<f64>>>()?;
        raw.rate_rows.push((line, rates, n));
    }
    Ok(raw)
}

impl RawConfig {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn number<T: std::str::FromStr>(
        &self,
        key: &str,
        expected: &'static str,
    ) -> Result<Option<(usize, T)>> {
        self.get(key)
            .map(|e| parse_number(e.line, key, &e.value, expected).map(|v| (e.line, v)))
            .transpose()
    }

    fn float(&self, key: &str) -> Result<Option<(usize, f64)>> {
        self.number(key, "a number")
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.float(key)? {
            Some((line, v)) if !(v > 0.0 && v.is_finite()) => {
                Err(range(line, key, "must be positive and finite"))
            }
            other => Ok(other.map(|(_, v)| v)),
        }
    }
}

fn range(line: usize, key: &str, message: &str) -> ConfigError {
    ConfigError::Range {
        line,
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn build_spec(raw: &RawConfig) -> Result<ProcessSpec> {
    let kind_line = raw.get("kind").map_or(0, |e| e.line);
    let kind = raw.get("kind").map_or("constant", |e| e.value.as_str());
    let process = |r: bdp_core::Result<ProcessSpec>, line: usize| {
        r.map_err(|source| ConfigError::Process { line, source })
    };
    match kind {
        "constant" => {
            if let Some(&(line, ..)) = raw.rate_rows.first() {
                return Err(ConfigError::Syntax {
                    line,
                    message: "rate rows need kind = table or geometric_ratio".into(),
                });
            }
            let lambda = raw
                .positive("lambda")?
                .ok_or(ConfigError::Missing("lambda"))?;
            let mu = raw.positive("mu")?.ok_or(ConfigError::Missing("mu"))?;
            process(
                ProcessSpec::constant(lambda, mu),
                raw.get("mu").unwrap().line,
            )
        }
        "table" | "geometric_ratio" => {
            let width = if kind == "table" { 2 } else { 1 };
            for key in ["lambda", "mu"] {
                if let Some(e) = raw.get(key) {
                    return Err(range(
                        e.line,
                        key,
                        &format!("is not used with kind = {kind}; give rate rows"),
                    ));
                }
            }
            if raw.rate_rows.is_empty() {
                return Err(ConfigError::Syntax {
                    line: kind_line,
                    message: format!("kind = {kind} needs rate rows"),
                });
            }
            let mut rows = Vec::with_capacity(raw.rate_rows.len());
            for (line, rates, n) in &raw.rate_rows {
                if rates.len() != width {
                    let form = if width == 2 {
                        "n lambda mu"
                    } else {
                        "n lambda"
                    };
                    return Err(ConfigError::Syntax {
                        line: *line,
                        message: format!("kind = {kind} rows have the form `{form}`"),
                    });
                }
                rows.push((*n, rates[0], rates.get(1).copied().unwrap_or(1.0)));
            }
            let first_line = raw.rate_rows[0].0;
            let table = process(ProcessSpec::table_from_rows(&rows), first_line)?;
            if kind == "table" {
                return Ok(table);
            }
            let c = raw.positive("c")?.ok_or(ConfigError::Missing("c"))?;
            let domain = table.domain().unwrap();
            let mut lambdas = vec![0.0; domain.len()];
            for (n, l, _) in rows {
                lambdas[domain.index(n).unwrap()] = l;
            }
            process(
                ProcessSpec::geometric_ratio(domain.n_min(), &lambdas, c),
                first_line,
            )
        }
        other => Err(ConfigError::Type {
            line: kind_line,
            key: "kind".into(),
            expected: "constant, table or geometric_ratio",
            value: other.to_string(),
        }),
    }
}

fn build_nu(raw: &RawConfig, spec: &ProcessSpec) -> Result<Option<NuMode>> {
    let Some(mode) = raw.get("nu_mode") else {
        if let Some(&(line, ..)) = raw.nu_rows.first() {
            return Err(ConfigError::Syntax {
                line,
                message: "nu rows need nu_mode = explicit".into(),
            });
        }
        return Ok(None);
    };
    let unused = |keys: &[&str]| -> Result<()> {
        for key in keys {
            if let Some(e) = raw.get(key) {
                return Err(range(
                    e.line,
                    key,
                    &format!("is not used with nu_mode = {}", mode.value),
                ));
            }
        }
        Ok(())
    };
    let nu = match mode.value.as_str() {
        "constant_ratio" => {
            unused(&["nu0", "d0"])?;
            let beta = raw.positive("beta")?.ok_or(ConfigError::Missing("beta"))?;
            // For geometric_ratio processes `c` describes the rates.
            let c = match spec.kind() {
                bdp_core::RateKind::GeometricRatio { .. } => None,
                _ => raw.positive("c")?,
            };
            NuMode::ConstantRatio { c, beta }
        }
        "recurrence" => {
            unused(&["beta"])?;
            let nu0 = raw.positive("nu0")?.unwrap_or(1.0);
            let (_, d0) = raw.float("d0")?.ok_or(ConfigError::Missing("d0"))?;
            NuMode::Recurrence { nu0, d0 }
        }
        "explicit" => {
            unused(&["beta", "nu0", "d0"])?;
            let mut rows = raw.nu_rows.clone();
            rows.sort_by_key(|r| r.1);
            if rows.is_empty() {
                return Err(ConfigError::Syntax {
                    line: mode.line,
                    message: "nu_mode = explicit needs rows `nu n value`".into(),
                });
            }
            for pair in rows.windows(2) {
                if pair[1].1 != pair[0].1 + 1 {
                    return Err(ConfigError::Syntax {
                        line: pair[1].0,
                        message: "nu rows must cover contiguous states without duplicates".into(),
                    });
                }
            }
            NuMode::Explicit {
                n_min: rows[0].1,
                values: rows.iter().map(|r| r.2).collect(),
            }
        }
        other => {
            return Err(ConfigError::Type {
                line: mode.line,
                key: "nu_mode".into(),
                expected: "constant_ratio, recurrence or explicit",
                value: other.to_string(),
            })
        }
    };
    if !matches!(nu, NuMode::Explicit { .. }) {
        if let Some(&(line, ..)) = raw.nu_rows.first() {
            return Err(ConfigError::Syntax {
                line,
                message: "nu rows need nu_mode = explicit".into(),
            });
        }
    }
    Ok(Some(nu))
}

fn build(raw: &RawConfig, spec: ProcessSpec) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(spec);
    cfg.nu = build_nu(raw, &cfg.spec)?;
    if let Some(e) = raw.get("window") {
        let parts: Vec<&str> = e.value.split_whitespace().collect();
        let bad = || ConfigError::Type {
            line: e.line,
            key: "window".into(),
            expected: "two integers `n_min n_max`",
            value: e.value.clone(),
        };
        if parts.len() != 2 {
            return Err(bad());
        }
        let a = parts[0].parse().map_err(|_| bad())?;
        let b = parts[1].parse().map_err(|_| bad())?;
        cfg.window = Some(
            StateWindow::new(a, b).map_err(|source| ConfigError::Process {
                line: e.line,
                source,
            })?,
        );
    }
    if let Some((_, k)) = raw.number("k", "an integer")? {
        cfg.k = k;
    }
    cfg.n = raw.number("n", "an integer")?.map(|(_, v)| v);
    cfg.s = raw.number("s", "an integer")?.map(|(_, v)| v);
    if let Some(t) = raw.positive("t_max")? {
        cfg.t_max = t;
    }
    if let Some((line, g)) = raw.number::<usize>("grid", "a positive integer")? {
        if g < 2 {
            return Err(range(line, "grid", "needs at least 2 points"));
        }
        cfg.grid = g;
    }
    if let Some((line, g)) = raw.number::<usize>("renewal_grid", "a positive integer")? {
        if g < 2 {
            return Err(range(line, "renewal_grid", "needs at least 2 points"));
        }
        cfg.renewal_grid = g;
    }
    if let Some((line, tol)) = raw.float("rel_tol")? {
        if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&tol) {
            return Err(range(
                line,
                "rel_tol",
                &format!("must lie in [{MIN_REL_TOL:e}, {MAX_REL_TOL:e}]"),
            ));
        }
        cfg.rel_tol = tol;
    }
    if let Some((line, trials)) = raw.number::<u64>("trials", "a positive integer")? {
        if trials == 0 {
            return Err(range(line, "trials", "must be at least 1"));
        }
        cfg.trials = trials;
    }
    if let Some((_, seed)) = raw.number("seed", "a nonnegative integer")? {
        cfg.seed = seed;
    }
    if let Some((line, threads)) = raw.number::<usize>("threads", "a positive integer")? {
        if threads == 0 {
            return Err(range(line, "threads", "must be at least 1"));
        }
        cfg.threads = Some(threads);
    }
    if let Some((line, bins)) = raw.number::<usize>("bins", "a positive integer")? {
        if bins == 0 {
            return Err(range(line, "bins", "must be at least 1"));
        }
        cfg.bins = bins;
    }
    cfg.horizon = raw.positive("horizon")?;
    for (key, slot) in [
        ("tol_transition", &mut cfg.tol_transition),
        ("tol_fpt", &mut cfg.tol_fpt),
        ("tol_crossing", &mut cfg.tol_crossing),
        ("tol_renewal", &mut cfg.tol_renewal),
    ] {
        if let Some(v) = raw.positive(key)? {
            *slot = v;
        }
    }
    cfg.output = raw.get("output").map(|e| PathBuf::from(&e.value));
    cfg.lines = raw
        .entries
        .iter()
        .map(|(k, e)| (k.clone(), e.line))
        .collect();
    Ok(cfg)
}

/// Parses configuration text; `base` resolves a relative `spec_file`.
pub fn parse_config_str(text: &str, base: Option<&Path>) -> Result<ExperimentConfig> {
    let raw = parse_raw(text)?;
    let spec = match raw.get("spec_file") {
        Some(e) => {
            for key in PROCESS_KEYS {
                if let Some(other) = raw.get(key) {
                    return Err(range(other.line, key, "conflicts with spec_file"));
                }
            }
            if let Some(&(line, ..)) = raw.rate_rows.first() {
                return Err(range(line, "rate row", "conflicts with spec_file"));
            }
            let path = match base {
                Some(dir) => dir.join(&e.value),
                None => PathBuf::from(&e.value),
            };
            let inner = parse_raw(&read(&path)?)?;
            if let Some((key, entry)) = inner
                .entries
                .iter()
                .find(|(k, _)| !PROCESS_KEYS.contains(&k.as_str()))
            {
                return Err(ConfigError::Syntax {
                    line: e.line,
                    message: format!(
                        "{} line {}: only process keys may appear in a spec file, found `{key}`",
                        path.display(),
                        entry.line
                    ),
                });
            }
            build_spec(&inner).map_err(|err| ConfigError::Syntax {
                line: e.line,
                message: format!("{}: {err}", path.display()),
            })?
        }
        None => build_spec(&raw)?,
    };
    build(&raw, spec)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config_str(&read(path)?, path.parent())
}

/// Writes a process in the configuration schema.
pub struct SpecText<'a> {
    pub spec: &'a ProcessSpec,
    pub window: Option<StateWindow>,
}

impl fmt::Display for SpecText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use bdp_core::RateKind;
        match self.spec.kind() {
            RateKind::Constant { lambda, mu } => {
                writeln!(f, "kind = constant")?;
                writeln!(f, "lambda = {lambda:.16e}")?;
                writeln!(f, "mu = {mu:.16e}")
            }
            RateKind::GeometricRatio { .. }
            | RateKind::Table { .. }
            | RateKind::TransformedConstant { .. } => {
                let window = match (self.window, self.spec.domain()) {
                    (Some(w), _) => w,
                    (None, Some(d)) => d,
                    (None, None) => return Err(fmt::Error),
                };
                writeln!(f, "kind = table")?;
                writeln!(f, "# n lambda mu")?;
                for n in window.states() {
                    let (l, m) = self.spec.rates_at(n).map_err(|_| fmt::Error)?;
                    writeln!(f, "{n} {l:.16e} {m:.16e}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse_config_str("lambda = 1\nmu = 2\n", None).unwrap();
        assert_eq!(cfg.spec, ProcessSpec::constant(1.0, 2.0).unwrap());
        assert_eq!(cfg.k, 0);
        assert_eq!(cfg.n(), 1);
        assert_eq!(cfg.grid, 200);
        assert_eq!(cfg.rel_tol, 1e-10);
        assert_eq!(cfg.trials, 100_000);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.window, None);
        assert_eq!(cfg.nu, None);
    }

    #[test]
    fn misspelled_key_is_named() {
        let err = parse_config_str("lamda = 1\nmu = 2\n", None).unwrap_err();
        assert!(
            matches!(&err, ConfigError::UnknownKey { line: 1, key } if key == "lamda"),
            "{err}"
        );
        assert!(err.to_string().contains("lamda"));
    }

    #[test]
    fn negative_beta_is_a_range_error() {
        let text = "lambda = 1\nmu = 2\nnu_mode = constant_ratio\nbeta = -1\n";
        let err = parse_config_str(text, None).unwrap_err();
        assert!(
            matches!(&err, ConfigError::Range { line: 4, key, .. } if key == "beta"),
            "{err}"
        );
    }

    #[test]
    fn table_rows_and_comments() {
        let text = "kind = table # per-state\n-1 1.0 2.0\n0 1.5 0.5\n1 2 1\nwindow = -1 1\n";
        let cfg = parse_config_str(text, None).unwrap();
        assert_eq!(cfg.spec.rates_at(0).unwrap(), (1.5, 0.5));
        assert_eq!(cfg.window, Some(StateWindow::new(-1, 1).unwrap()));
    }

    #[test]
    fn bad_rows_report_lines() {
        let err = parse_config_str("kind = table\n0 1 2\n2 1 1\n3 1 1\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Process { line: 2, .. }), "{err}");
        let err = parse_config_str("kind = table\n0 1 x\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Type { line: 2, .. }), "{err}");
        let err = parse_config_str("kind = table\n0 1 -2\n1 1 1\n2 1 1\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Process { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicates_and_types() {
        let err = parse_config_str("lambda = 1\nmu = 2\nmu = 3\n", None).unwrap_err();
        assert!(
            matches!(
                err,
                ConfigError::Duplicate {
                    line: 3,
                    first: 2,
                    ..
                }
            ),
            "{err}"
        );
        let err = parse_config_str("lambda = 1\nmu = 2\nk = 0.5\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Type { line: 3, .. }), "{err}");
        let err = parse_config_str("lambda = 1\nmu = 2\nrel_tol = 1e-3\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Range { line: 3, .. }), "{err}");
        let err = parse_config_str("lambda = 1\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Missing("mu")), "{err}");
    }

    #[test]
    fn nu_modes() {
        let cfg =
            parse_config_str("lambda = 1\nmu = 2\nnu_mode = recurrence\nd0 = 0.5\n", None).unwrap();
        assert_eq!(cfg.nu, Some(NuMode::Recurrence { nu0: 1.0, d0: 0.5 }));
        let cfg = parse_config_str(
            "lambda = 1\nmu = 2\nnu_mode = explicit\nnu 1 3\nnu 0 2\nnu -1 1.5\n",
            None,
        )
        .unwrap();
        assert_eq!(
            cfg.nu,
            Some(NuMode::Explicit {
                n_min: -1,
                values: vec![1.5, 2.0, 3.0]
            })
        );
        let err = parse_config_str(
            "lambda = 1\nmu = 2\nnu_mode = recurrence\nd0 = 1\nbeta = 1\n",
            None,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Range { line: 5, .. }), "{err}");
    }

    #[test]
    fn spec_text_round_trips() {
        let spec = ProcessSpec::table(-2, &[(1.0, 2.0), (0.3, 0.7), (1.0 / 3.0, 2.5), (4.0, 1e-3)])
            .unwrap();
        let text = SpecText {
            spec: &spec,
            window: None,
        }
        .to_string();
        let back = parse_config_str(&text, None).unwrap();
        assert_eq!(back.spec, spec);
    }
}
