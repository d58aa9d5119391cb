//! `kkqed` command-line front end.
//!
//! Every subcommand reads one TOML run configuration, writes CSV and JSON
//! files into the output directory, and reports failures as a single JSON
//! line on stderr.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical threshold
//! exceeded, 3 I/O or parse failure, 4 fundamental-relation check in the
//! boundary-flux regime (no absorbing region).

mod cmd;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::cmd::Context;
use crate::config::{read_toml, Resolver, RunConfig};
use crate::error::{CliError, Result, Status};
use crate::output::OutDir;

#[derive(Parser, Debug)]
#[command(name = "kkqed", version, about = "Causal permittivities, lossy four-ports and decay rates near absorbers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory receiving the CSV and JSON outputs.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Override the command's acceptance tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Permittivity table and Kramers-Kronig causality report.
    Eps,
    /// Device matrices, group residuals and output photon statistics.
    Device,
    /// Height sweep of the decay rate above a half-space.
    Decay,
    /// Absorption sum rule for the 1D Green function of a stack.
    Verify,
}

fn missing(section: &str) -> CliError {
    CliError::Config(format!("missing [{section}] section"))
}

fn run(cli: &Cli) -> Result<Status> {
    if let Some(t) = cli.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Invalid(format!("--tolerance must be positive, got {t}")));
        }
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg: RunConfig = read_toml(path)?;
    let ctx = Context { resolver: Resolver::for_file(path), out: OutDir::create(&cli.out)?, tolerance: cli.tolerance };
    match cli.command {
        Command::Eps => cmd::eps::run(cfg.eps.as_ref().ok_or_else(|| missing("eps"))?, &ctx),
        Command::Device => cmd::device::run(cfg.device.as_ref().ok_or_else(|| missing("device"))?, &ctx),
        Command::Decay => cmd::decay::run(cfg.decay.as_ref().ok_or_else(|| missing("decay"))?, &ctx),
        Command::Verify => cmd::verify::run(cfg.verify.as_ref().ok_or_else(|| missing("verify"))?, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => {
            if status != Status::Success {
                eprintln!("{{\"status\":{}}}", status as u8);
            }
            ExitCode::from(status as u8)
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.status() as u8)
        }
    }
}
