//! `speclab`: command-line front end of the spectral laboratory.
//!
//! Every command reads a TOML config, writes deterministic outputs plus a
//! manifest into `--out`, and `rerun` reproduces any manifest bit-exactly.
//! The only environment variable honoured is `SPECLAB_WORKERS` (worker
//! count for the parallel walkers).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod manifest;

use config::RunConfig;
use manifest::Manifest;

#[derive(Parser)]
#[command(name = "speclab", version, about = "Numerical laboratory for 1d Schrödinger operators with matrix-valued potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the driven equation and export u, ψ as CSV.
    Solve(CommonArgs),
    /// Spectral density by the boundary formula, optional Stieltjes cross-check.
    Density(CommonArgs),
    /// Entropy integral over an interval in k.
    Entropy(CommonArgs),
    /// Multiscale truncation iteration with per-scale records.
    Iterate(CommonArgs),
    /// Run equation-level verification checks; exits nonzero on any failure.
    Verify {
        /// Check name (energy-identity, rough-bound, convolution,
        /// combes-thomas, windowed-decay, all); overrides the config list.
        check: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Harmonic-measure battery over a planar domain.
    Harmonic(CommonArgs),
    /// Re-execute a run from its manifest.
    Rerun {
        /// Path to a manifest.json produced by a previous run.
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

fn init_workers() {
    if let Ok(w) = std::env::var("SPECLAB_WORKERS") {
        if let Ok(n) = w.parse::<usize>() {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
        }
    }
}

fn run() -> anyhow::Result<bool> {
    init_workers();
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(a) => commands::execute("solve", &RunConfig::load(&a.config)?, &a.out),
        Command::Density(a) => commands::execute("density", &RunConfig::load(&a.config)?, &a.out),
        Command::Entropy(a) => commands::execute("entropy", &RunConfig::load(&a.config)?, &a.out),
        Command::Iterate(a) => commands::execute("iterate", &RunConfig::load(&a.config)?, &a.out),
        Command::Verify { check, common } => {
            let mut cfg = RunConfig::load(&common.config)?;
            if let Some(name) = check {
                let mut vc = cfg.verify.clone().unwrap_or_else(|| {
                    toml::from_str("").expect("verify defaults")
                });
                vc.checks = vec![name];
                cfg.verify = Some(vc);
            }
            commands::execute("verify", &cfg, &common.out)
        }
        Command::Harmonic(a) => commands::execute("harmonic", &RunConfig::load(&a.config)?, &a.out),
        Command::Rerun { manifest, out } => {
            let m = Manifest::load(&manifest).context("loading manifest")?;
            commands::execute(&m.command, &m.config, &out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("speclab: one or more checks failed");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("speclab: error: {err:#}");
            ExitCode::from(2)
        }
    }
}
