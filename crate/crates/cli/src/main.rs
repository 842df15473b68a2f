//! Command-line front end: eigenvalues, squeezing spectra and stochastic
//! cross-checks of bright cavity solitons, written as CSV.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use commands::Failure;
use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "soliton-squeeze", version, about = "Quantum fluctuations of bright cavity solitons in the degenerate OPO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues and tagged special modes of the fluctuation operator.
    Eigs(Common),
    /// Homodyne squeezing spectrum S(omega), optionally swept over one key.
    Squeeze(Common),
    /// Grid-space Langevin simulation compared with the analytic spectrum.
    Oracle(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Directory for the CSV output.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, Failure> {
    let (common, command): (&Common, fn(&RunConfig, &std::path::Path) -> Result<Vec<PathBuf>, Failure>) =
        match &cli.command {
            Command::Eigs(c) => (c, commands::eigs),
            Command::Squeeze(c) => (c, commands::squeeze),
            Command::Oracle(c) => (c, commands::oracle),
        };
    let cfg = match &common.config {
        Some(path) => RunConfig::from_file(path, &common.set)?,
        None => RunConfig::load(None, &common.set)?,
    };
    command(&cfg, &common.out)
}

fn main() -> ExitCode {
    let keys = config::key_help();
    let mut cmd = Cli::command().after_help(keys.clone());
    for name in ["eigs", "squeeze", "oracle"] {
        cmd = cmd.mut_subcommand(name, |s| s.after_help(keys.clone()));
    }
    let cli = match Cli::from_arg_matches(&cmd.get_matches()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
