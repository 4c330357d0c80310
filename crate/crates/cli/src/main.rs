use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use beamalign_cli::commands;
use beamalign_cli::{ExperimentConfig, FileConfig, Overrides};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "beamalign",
    version,
    about = "Beam-alignment throughput experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Throughput versus sensing duration for every policy.
    Sweep,
    /// Optimal bisection sensing duration, with the full scan.
    Optimize,
    /// Peak throughput per policy and degradation against bisection.
    Compare,
    /// Monte Carlo of each policy at one sensing budget.
    Simulate,
}

#[derive(Args)]
struct Opts {
    /// Frame length N in slots.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Base SNR in dB.
    #[arg(long = "gamma0-db", global = true, allow_negative_numbers = true)]
    gamma0_db: Option<f64>,
    /// Prior width in radians; accepts `2pi`, `pi/4`, ...
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// bisection | exhaustive[:K] | iterative:M (repeatable).
    #[arg(long, global = true)]
    policy: Vec<String>,
    #[arg(long, global = true)]
    episodes: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV output path; CSV goes to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Load the N = 50, -5 dB, 2pi scenario (the default without --config).
    #[arg(long, global = true, conflicts_with = "config")]
    paper: bool,
    /// Flat TOML file of settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sensing budget L for `simulate` (default: bisection optimum).
    #[arg(long, global = true)]
    sensing: Option<usize>,
    /// Worker threads for Monte Carlo (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Add Monte Carlo columns to `sweep`.
    #[arg(long, global = true)]
    simulate: bool,
}

fn build_config(opts: Opts) -> anyhow::Result<ExperimentConfig> {
    let base = match &opts.config {
        Some(path) => ExperimentConfig::from_file(FileConfig::load(path)?)?,
        None => ExperimentConfig::paper(),
    };
    if opts.threads == Some(0) {
        bail!("--threads must be >= 1");
    }
    let cfg = base.apply(Overrides {
        n: opts.n,
        gamma0_db: opts.gamma0_db,
        sigma: opts.sigma,
        policies: opts.policy,
        episodes: opts.episodes,
        seed: opts.seed,
        out: opts.out,
        sensing: opts.sensing,
        threads: opts.threads,
        simulate: opts.simulate,
    })?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = build_config(cli.opts)?;
    let out = match cli.command {
        Command::Sweep => commands::sweep(&cfg),
        Command::Optimize => commands::optimize(&cfg),
        Command::Compare => commands::compare(&cfg),
        Command::Simulate => commands::simulate(&cfg),
    }?;
    let mut text = out.report.clone();
    match &cfg.out {
        Some(path) => {
            out.table
                .write_atomic(path)
                .with_context(|| format!("writing {}", path.display()))?;
            text.push_str(&format!(
                "wrote {} rows to {}\n",
                out.table.rows.len(),
                path.display()
            ));
        }
        None => text.push_str(&out.table.to_csv_string()),
    }
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
    {
        // the reader went away (e.g. `| head`); nothing left to report to
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
