use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curved_nbody::{cli, Error};

#[derive(Parser)]
#[command(name = "curved-nbody", version, about = "Relative equilibria of the curved n-body problem")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration and write a CSV trajectory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve for relative equilibria and write a JSONL catalog.
    FindEq {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-check one record of a catalog.
    Verify {
        #[arg(long)]
        eq: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Run the probe named in the config and write a CSV report.
    Probe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(args: Args) -> Result<u8, Error> {
    let mut stdout = io::stdout().lock();
    match args.command {
        Command::Simulate { config, out } => {
            cli::simulate(&cli::load(&config)?, &out)?;
        }
        Command::FindEq { config, out, seed } => {
            cli::find_eq(&cli::load(&config)?, &out, seed, cli::threads_from_env()?, &mut stdout)?;
        }
        Command::Verify { eq, index } => {
            if !cli::verify(&eq, index, &mut stdout)? {
                return Ok(cli::EXIT_CHECK_FAILED);
            }
        }
        Command::Probe { config, out, seed } => {
            cli::probe(&cli::load(&config)?, &out, seed, cli::threads_from_env()?, &mut stdout)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
