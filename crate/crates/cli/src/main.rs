use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tnkit_cli::{expect_report, inspect_report, run, CliError, RunConfig, SEED_VAR};

#[derive(Parser)]
#[command(name = "tnkit", version, about = "DMRG runs and tensor network archives")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run DMRG as described by a JSON config.
    Run {
        config: PathBuf,
        /// Print zero sweep times so logs are reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// List the records of an archive.
    Inspect { archive: PathBuf },
    /// Print a local expectation value on every site of an archived state.
    Expect {
        archive: PathBuf,
        #[arg(long)]
        op: String,
        #[arg(long, default_value = "psi")]
        record: String,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Run { config, no_timing } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Ok(v) = std::env::var(SEED_VAR) {
                cfg.seed = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("{SEED_VAR}={v} is not a seed")))?;
            }
            run(&cfg, !no_timing)?;
        }
        Cmd::Inspect { archive } => print!("{}", inspect_report(&read(&archive)?)?),
        Cmd::Expect { archive, op, record } => print!("{}", expect_report(&read(&archive)?, &record, &op)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tnkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
