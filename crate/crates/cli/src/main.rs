//! `shear-decay`: evolve passive scalars in shear flows, sweep viscosities,
//! and check the solver and the functional inequalities.
//!
//! Exit codes: 0 success, 1 a check failed or the computation broke down,
//! 2 invalid configuration.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use shear_decay::harness::Timescale;
use shear_decay::BoundaryCondition;

use crate::config::{Config, FamilyKind, Scheme};

/// Caps the worker count regardless of `--threads`.
const THREADS_ENV: &str = "SHEAR_DECAY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "shear-decay", version, about = "Enhanced dissipation of passive scalars in shear flows")]
struct Cli {
    /// TOML manifest; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the output files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the initial data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve one datum and record norms over time.
    Run(RunArgs),
    /// Measure decay timescales over a list of viscosities and fit the exponent.
    Sweep(SweepArgs),
    /// Compare the solver with the exact Couette solution and the dense exponential.
    Oracle(OracleArgs),
    /// Evaluate the functional inequalities on the test families.
    Inequalities(InequalityArgs),
    /// Monitor the Gevrey-weighted amplification of a trajectory.
    Gevrey(GevreyArgs),
}

#[derive(Debug, Args)]
struct ResolutionArgs {
    /// Fix the grid size instead of scaling it with nu.
    #[arg(long)]
    n_y: Option<usize>,
    #[arg(long)]
    m_max: Option<u32>,
    /// Fixed time step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    include_x_diffusion: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    bc: Option<String>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// End time as a multiple of nu^{-alpha} when --t-end is absent.
    #[arg(long)]
    window_multiplier: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Also write the full state at every sample.
    #[arg(long)]
    record_snapshots: bool,
    #[command(flatten)]
    resolution: ResolutionArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    bc: Option<String>,
    #[arg(long)]
    nu_min: Option<f64>,
    #[arg(long)]
    nu_max: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    /// Comma-separated viscosities.
    #[arg(long, value_delimiter = ',')]
    nu_list: Option<Vec<f64>>,
    /// Timescale used for the fit: efold or tail_rate.
    #[arg(long)]
    timescale: Option<String>,
    /// Tail-fit window in e-folds, as lo,hi.
    #[arg(long, value_delimiter = ',')]
    tail_window: Option<Vec<f64>>,
    /// Also run the grid-independence gate at the smallest nu.
    #[arg(long)]
    gate: bool,
    #[command(flatten)]
    resolution: ResolutionArgs,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    n_y: Option<usize>,
    /// Comparison time; defaults to nu^{-1/3}.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct InequalityArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyKind>,
    /// Use this constant instead of twice the calibration maximum.
    #[arg(long)]
    c_cal: Option<f64>,
}

#[derive(Debug, Args)]
struct GevreyArgs {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    bc: Option<String>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Weight rate; bisected when absent.
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    bound: Option<f64>,
    #[command(flatten)]
    resolution: ResolutionArgs,
}

/// Failure classes, mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    let cfg = resolve(&cli).map_err(Failure::Config)?;
    configure_threads(cli.threads).map_err(Failure::Runtime)?;
    let outcome = match &cli.command {
        Command::Run(_) => commands::run(&cfg),
        Command::Sweep(_) => commands::sweep(&cfg),
        Command::Oracle(_) => commands::oracle(&cfg),
        Command::Inequalities(_) => commands::inequalities(&cfg),
        Command::Gevrey(_) => commands::gevrey(&cfg),
    }
    .map_err(classify)?;
    let written = outcome.files.commit(&cli.out).map_err(Failure::Runtime)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    println!("{}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.summary);
    Ok(outcome.pass)
}

/// Errors that describe bad input rather than a failed computation.
fn classify(e: anyhow::Error) -> Failure {
    use shear_decay::Error as E;
    match e.downcast_ref::<E>() {
        Some(
            E::UnknownProfile { .. }
            | E::UnknownBoundary(_)
            | E::NegativeOrder(_)
            | E::OrderExceedsMaximum { .. }
            | E::GridTooCoarse(_)
            | E::InvalidParameter(_)
            | E::TooLargeForDense(_),
        ) => Failure::Config(e),
        _ => Failure::Runtime(e),
    }
}

fn configure_threads(requested: usize) -> Result<()> {
    let mut threads = requested;
    if let Ok(cap) = std::env::var(THREADS_ENV) {
        let cap: usize = cap.parse().with_context(|| format!("{THREADS_ENV}={cap} is not a count"))?;
        if cap > 0 {
            threads = if threads == 0 { cap } else { threads.min(cap) };
        }
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("starting the worker pool")
}

fn bc(text: &str) -> Result<BoundaryCondition> {
    Ok(text.parse()?)
}

fn resolve(cli: &Cli) -> Result<Config> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.resolution.seed = seed;
    }
    let apply_resolution = |cfg: &mut Config, r: &ResolutionArgs| {
        if let Some(n) = r.n_y {
            cfg.resolution.n_y_min = n;
            cfg.resolution.n_y_max = n;
        }
        if let Some(m) = r.m_max {
            cfg.resolution.m_max = m;
        }
        if r.dt.is_some() {
            cfg.resolution.dt = r.dt;
        }
        if r.include_x_diffusion {
            cfg.resolution.include_x_diffusion = true;
        }
    };
    match &cli.command {
        Command::Run(a) => {
            let s = &mut cfg.run;
            set(&mut s.profile, a.profile.clone());
            if let Some(b) = &a.bc {
                s.bc = bc(b)?;
            }
            set(&mut s.nu, a.nu);
            if a.t_end.is_some() {
                s.t_end = a.t_end;
            }
            set(&mut s.window_multiplier, a.window_multiplier);
            set(&mut s.samples, a.samples);
            s.record_snapshots |= a.record_snapshots;
            apply_resolution(&mut cfg, &a.resolution);
        }
        Command::Sweep(a) => {
            let s = &mut cfg.sweep;
            set(&mut s.profile, a.profile.clone());
            if let Some(b) = &a.bc {
                s.bc = bc(b)?;
            }
            set(&mut s.nu_min, a.nu_min);
            set(&mut s.nu_max, a.nu_max);
            set(&mut s.count, a.count);
            if a.nu_list.is_some() {
                s.nu_list = a.nu_list.clone();
            }
            if let Some(t) = &a.timescale {
                s.timescale = t.parse::<Timescale>()?;
            }
            if let Some(w) = &a.tail_window {
                let [lo, hi] = w[..] else {
                    anyhow::bail!("--tail-window takes two values, lo,hi");
                };
                s.tail_window = [lo, hi];
            }
            s.gate |= a.gate;
            apply_resolution(&mut cfg, &a.resolution);
        }
        Command::Oracle(a) => {
            let o = &mut cfg.oracle;
            set(&mut o.nu, a.nu);
            set(&mut o.n_y, a.n_y);
            if a.t.is_some() {
                o.t = a.t;
            }
            set(&mut o.dt, a.dt);
            set(&mut o.scheme, a.scheme);
            set(&mut o.tolerance, a.tolerance);
        }
        Command::Inequalities(a) => {
            let q = &mut cfg.inequalities;
            set(&mut q.family, a.family);
            if a.c_cal.is_some() {
                q.c_cal = a.c_cal;
            }
        }
        Command::Gevrey(a) => {
            let g = &mut cfg.gevrey;
            set(&mut g.profile, a.profile.clone());
            if let Some(b) = &a.bc {
                g.bc = bc(b)?;
            }
            set(&mut g.nu, a.nu);
            set(&mut g.p, a.p);
            if a.d0.is_some() {
                g.d0 = a.d0;
            }
            set(&mut g.bound, a.bound);
            apply_resolution(&mut cfg, &a.resolution);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
