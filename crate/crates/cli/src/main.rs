use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use bdp_cli::commands::{run_example, run_fpt, run_nu, run_simulate, run_solve, run_transform};
use bdp_cli::{parse_config, run_verify, ExperimentConfig, NuMode};
use bdp_core::{ProcessSpec, StateWindow};
use clap::{Args, Parser, Subcommand};

/// Similarity transformations of bilateral birth-death processes.
///
/// Every subcommand reads an experiment configuration file; flags override
/// its values. Output is CSV on stdout unless `--output` or the `output`
/// key names a file.
#[derive(Debug, Parser)]
#[command(name = "bdp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the nu sequence: n, nu_n, d_n = nu_{n+1} - nu_n, recurrence residual.
    Nu(Overrides),
    /// Print the transformed rate table in the configuration schema.
    Transform(Overrides),
    /// Solve the truncated forward equations: t, n, p.
    Solve(Overrides),
    /// First-passage-time density to `s`: t, g, absorbed_mass.
    Fpt(Overrides),
    /// Monte Carlo: first-passage histogram to `s` (crossing summary on
    /// stderr), or the law of X(t_max) when no `s` is given.
    Simulate(Overrides),
    /// Constant-rate closed forms: t, p, p_tilde, g, g_tilde, ratio.
    /// Without a configuration file this uses lambda = 1, mu = 2, beta = 1.
    Example(ExampleArgs),
    /// Run the full cross-check pipeline and print a PASS/FAIL residual
    /// table; exits with status 1 if any check fails.
    Verify(Overrides),
}

#[derive(Debug, Args)]
struct Overrides {
    /// Experiment configuration file.
    config: PathBuf,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Debug, Args)]
struct ExampleArgs {
    /// Experiment configuration file (kind = constant).
    config: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Debug, Args)]
struct CommonFlags {
    /// Start state.
    #[arg(long, allow_negative_numbers = true)]
    k: Option<i64>,
    /// End state for transition probabilities.
    #[arg(long, allow_negative_numbers = true)]
    n: Option<i64>,
    /// Target state for first passages.
    #[arg(long, allow_negative_numbers = true)]
    s: Option<i64>,
    /// Final time of the grid (also the simulated time without `s`).
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid points on [0, t_max].
    #[arg(long)]
    grid: Option<usize>,
    /// Solver relative tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Truncation window.
    #[arg(long, num_args = 2, value_names = ["N_MIN", "N_MAX"], allow_negative_numbers = true)]
    window: Option<Vec<i64>>,
    /// Monte Carlo trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Histogram bins.
    #[arg(long)]
    bins: Option<usize>,
    /// Simulation horizon for first passages.
    #[arg(long)]
    t_end: Option<f64>,
    /// Write output here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl CommonFlags {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(k) = self.k {
            cfg.k = k;
        }
        cfg.n = self.n.or(cfg.n);
        cfg.s = self.s.or(cfg.s);
        if let Some(t) = self.t_max {
            anyhow::ensure!(t > 0.0 && t.is_finite(), "--t-max must be positive");
            cfg.t_max = t;
        }
        if let Some(g) = self.grid {
            anyhow::ensure!(g >= 2, "--grid needs at least 2 points");
            cfg.grid = g;
        }
        if let Some(tol) = self.rel_tol {
            cfg.rel_tol = tol;
        }
        if let Some(w) = &self.window {
            cfg.window = Some(StateWindow::new(w[0], w[1])?);
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.threads = self.threads.or(cfg.threads);
        if let Some(b) = self.bins {
            cfg.bins = b;
        }
        cfg.horizon = self.t_end.or(cfg.horizon);
        cfg.output = self.output.clone().or(cfg.output.take());
        Ok(())
    }
}

fn load(o: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg =
        parse_config(&o.config).with_context(|| format!("reading {}", o.config.display()))?;
    o.common.apply(&mut cfg)?;
    Ok(cfg)
}

fn load_example(a: &ExampleArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => parse_config(path).with_context(|| format!("reading {}", path.display()))?,
        None => {
            let mut cfg = ExperimentConfig::new(ProcessSpec::constant(1.0, 2.0)?);
            cfg.nu = Some(NuMode::ConstantRatio { c: None, beta: 1.0 });
            cfg
        }
    };
    if a.lambda.is_some() || a.mu.is_some() {
        let (l0, m0) = cfg.spec.rates_at(0)?;
        cfg.spec = ProcessSpec::constant(a.lambda.unwrap_or(l0), a.mu.unwrap_or(m0))?;
    }
    if let Some(beta) = a.beta {
        cfg.nu = Some(NuMode::ConstantRatio { c: None, beta });
    }
    a.common.apply(&mut cfg)?;
    Ok(cfg)
}

fn output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (cfg, command) = match &cli.command {
        Command::Example(a) => (load_example(a)?, &cli.command),
        Command::Nu(o)
        | Command::Transform(o)
        | Command::Solve(o)
        | Command::Fpt(o)
        | Command::Simulate(o)
        | Command::Verify(o) => (load(o)?, &cli.command),
    };
    let mut out = output(&cfg)?;
    let mut code = ExitCode::SUCCESS;
    match command {
        Command::Nu(_) => run_nu(&cfg, &mut out)?,
        Command::Transform(_) => run_transform(&cfg, &mut out)?,
        Command::Solve(_) => run_solve(&cfg, &mut out)?,
        Command::Fpt(_) => run_fpt(&cfg, &mut out)?,
        Command::Simulate(_) => run_simulate(&cfg, &mut out, &mut io::stderr().lock())?,
        Command::Example(_) => run_example(&cfg, &mut out)?,
        Command::Verify(_) => {
            let report = run_verify(&cfg)?;
            report.write_csv(&mut out)?;
            if !report.passed() {
                code = ExitCode::from(1);
            }
        }
    }
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
