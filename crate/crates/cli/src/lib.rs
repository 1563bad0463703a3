//! Command-line front end for the `intertwine` core.

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::RunConfig;
use output::Artifact;

#[derive(Parser, Debug)]
#[command(name = "intertwine", version, about = "Twisted orbital integrals and residues for Sp/SO test data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weight factors W_k, closed form against lattice-point oracle
    Wfactor(Args),
    /// S(γ), the twisted discriminant and centralizer sampling
    Dtwist(Args),
    /// Support of the twisted test function along G/T
    SupportScan(Args),
    /// Weighted twisted orbital integrals Ψ_k(γ)
    Psik(Args),
    /// Coefficients c_k of the u-expansion
    Coeffs(Args),
    /// R_G (odd p) or the affine pair A, B (p = 2)
    RgTerm(Args),
    /// Closed form, Laurent expansion and residue
    Residue(Args),
    /// Run every acceptance criterion
    Selftest(SelftestArgs),
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(short, long)]
    pub config: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct SelftestArgs {
    /// criterion ids to run (all when empty)
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
    #[arg(long)]
    pub json: bool,
}

/// 2 for truncation failures, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<intertwine::Error>() {
        Some(intertwine::Error::TailNonzero(_)) | Some(intertwine::Error::NoStabilization(_)) => 2,
        _ => 1,
    }
}

pub fn run_command(name: &str, cfg: &RunConfig) -> Result<Artifact> {
    match name {
        "wfactor" => commands::wfactor(cfg),
        "dtwist" => commands::dtwist(cfg),
        "support-scan" => commands::support(cfg),
        "psik" => commands::psik(cfg),
        "coeffs" => commands::coeffs(cfg),
        "rg-term" => commands::rg(cfg),
        "residue" => commands::residue(cfg),
        other => anyhow::bail!("unknown command {other}"),
    }
}

/// Runs `name` on `cfg` inside a pool of `cfg.workers` threads and renders it.
pub fn render(name: &str, cfg: &RunConfig) -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let art = pool.install(|| run_command(name, cfg))?;
    art.render(cfg.output.format)
}

pub fn write_output(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output.path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| anyhow::anyhow!("writing {}: {e}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
