mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

/// Experiments with averaged generalized sampling series: kernel checks,
/// operator tables and variation studies.
#[derive(Debug, Parser)]
#[command(name = "varsamp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    config: Config,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition of unity, absolute moment, L1 norm and Fourier conditions.
    CheckKernel,
    /// CSV of the kernel and its m-average over a grid.
    KernelTable,
    /// CSV of the averaged series and its derivative for each w.
    Eval,
    /// Variation-detracting comparison for each w.
    Detract,
    /// Residual of the derivative identity over a grid, for each w.
    DerivativeIdentity,
    /// Convergence in variation of the averaged series across w.
    Converge,
}

#[derive(Debug, Args)]
pub struct Config {
    /// Kernel id: bspline:n, fejer, bochner-riesz:g, avg:m:<id>, scale:c:<id>.
    #[arg(long, global = true, default_value = "bspline:2")]
    pub kernel: String,

    /// Signal id: hat[:a], witch, bump, heaviside, staircase3, ramp_clip, const:c.
    #[arg(long, global = true, default_value = "hat")]
    pub signal: String,

    /// Averaging width.
    #[arg(long, global = true)]
    pub m: Option<u32>,

    /// Sampling rate; repeat for several, in ascending order.
    #[arg(long = "w", global = true)]
    pub w: Vec<f64>,

    /// Evaluation grid as start:stop:count.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid: Option<Grid>,

    /// Pass/fail tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Also write a gnuplot script next to the CSV as `<out>.gp`.
    #[arg(long, global = true)]
    pub plot: bool,

    /// Add a wall_time column to convergence output (breaks byte reproducibility).
    #[arg(long, global = true)]
    pub timing: bool,

    /// Tabulate the averaged kernel at this step and interpolate (eval only).
    #[arg(long, global = true)]
    pub cache_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let n = self.count - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * (i as f64 / n as f64)
                }
            })
            .collect()
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected start:stop:count, got `{s}`"));
    };
    let start: f64 = a.parse().map_err(|_| format!("bad start `{a}`"))?;
    let stop: f64 = b.parse().map_err(|_| format!("bad stop `{b}`"))?;
    let count: usize = n.parse().map_err(|_| format!("bad count `{n}`"))?;
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(format!("need finite start < stop, got {start} and {stop}"));
    }
    if count < 2 {
        return Err(format!("count must be at least 2, got {count}"));
    }
    Ok(Grid { start, stop, count })
}

impl Config {
    fn validate(&self) -> anyhow::Result<()> {
        if self.w.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            bail!("sampling rates must be positive and finite");
        }
        if self.w.windows(2).any(|p| p[0] >= p[1]) {
            bail!("sampling rates must be strictly ascending");
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                bail!("--tol must be positive, got {tol}");
            }
        }
        if self.m == Some(0) {
            bail!("--m must be at least 1");
        }
        if self.plot && self.out.is_none() {
            bail!("--plot needs --out");
        }
        if let Some(h) = self.cache_step {
            if !(h > 0.0 && h.is_finite()) {
                bail!("--cache-step must be positive, got {h}");
            }
        }
        Ok(())
    }
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("VARSAMP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("VARSAMP_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// What a command concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NonConvergence,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<varsamp::Error>() {
        Some(e) if e.is_non_convergence() => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> anyhow::Result<Verdict> {
    init_threads()?;
    cli.config.validate()?;
    let cfg = &cli.config;
    match cli.command {
        Command::CheckKernel => commands::check_kernel(cfg),
        Command::KernelTable => commands::kernel_table(cfg),
        Command::Eval => commands::eval(cfg),
        Command::Detract => commands::detract(cfg),
        Command::DerivativeIdentity => commands::derivative_identity(cfg),
        Command::Converge => commands::converge(cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Ok(Verdict::NonConvergence) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
