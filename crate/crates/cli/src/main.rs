use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::Failure;
use config::RunConfig;

/// Spectral enclosures for the bilayer graphene operator with complex matrix potentials.
#[derive(Parser)]
#[command(name = "bilayer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Replace the campaign seeds by this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for scans and campaigns.
    #[arg(long, global = true, env = "BILAYER_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Admissibility mask and boundary of the selected enclosure.
    Region { config: PathBuf },
    /// Eigenvalues of the discretised operator with diagnostics.
    Eigs { config: PathBuf },
    /// Birman–Schwinger norm over the scan window.
    Bsnorm { config: PathBuf },
    /// Seeded trial campaign checked against the selected enclosure.
    Verify { config: PathBuf },
    /// Smallest constants consistent with a trial campaign.
    Calibrate { config: PathBuf },
    /// Empirical constants of the kernel bounds.
    KernelProbe { config: PathBuf },
}

fn run(cli: Cli) -> Result<(), Failure> {
    let path = match &cli.command {
        Command::Region { config }
        | Command::Eigs { config }
        | Command::Bsnorm { config }
        | Command::Verify { config }
        | Command::Calibrate { config }
        | Command::KernelProbe { config } => config,
    };
    let mut cfg = RunConfig::load(path).map_err(Failure::Config)?;
    if let Some(dir) = cli.out {
        cfg.output.directory = dir;
    }
    if let (Some(seed), Some(camp)) = (cli.seed, cfg.campaign.as_mut()) {
        camp.seeds = vec![seed];
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Compute(e.to_string()))?;
    }
    match cli.command {
        Command::Region { .. } => commands::region(&cfg),
        Command::Eigs { .. } => commands::eigs(&cfg),
        Command::Bsnorm { .. } => commands::bsnorm(&cfg),
        Command::Verify { .. } => commands::verify(&cfg),
        Command::Calibrate { .. } => commands::calibrate_cmd(&cfg),
        Command::KernelProbe { .. } => commands::kernel_probe(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("bilayer: config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("bilayer: {msg}");
            ExitCode::from(3)
        }
    }
}
