//! Command-line front end: `design`, `simulate`, `sweep` and `verify`.
//!
//! Exit codes: 0 ok, 1 usage, 2 radii geometry, 3 delta above its bound,
//! 4 audit failure, 5 barrier breach, 6 unreadable or malformed files.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{CliError, SweepParam, VerifyInputs};

#[derive(Debug, Parser)]
#[command(name = "circumnav", version, about = "Safe circumnavigation controller design and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the design report for a config.
    Design {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate, audit, and write trajectory.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run one simulation per value of a parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        sweep_param: SweepParam,
        /// Comma-separated.
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        sweep_values: Vec<f64>,
        /// Writes sweep.csv here; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-audit a stored trajectory.
    Verify {
        /// Output directory of a previous simulate.
        #[arg(long, conflicts_with = "trajectory")]
        out: Option<PathBuf>,
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Run config or summary.json for --trajectory.
        #[arg(long, requires = "trajectory")]
        config: Option<PathBuf>,
    },
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Design { config } => commands::cmd_design(&config, stdout),
        Command::Simulate { config, out } => commands::cmd_simulate(&config, &out, stdout),
        Command::Sweep {
            config,
            sweep_param,
            sweep_values,
            out,
        } => commands::cmd_sweep(&config, sweep_param, &sweep_values, out.as_deref(), stdout),
        Command::Verify { out, trajectory, config } => {
            let inputs = match (out, trajectory) {
                (Some(dir), None) => VerifyInputs::from_out_dir(&dir),
                (None, Some(trajectory)) => VerifyInputs { trajectory, config },
                _ => return Err(CliError::usage("verify needs --out <dir> or --trajectory <file>")),
            };
            commands::cmd_verify(&inputs, stdout)
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { commands::EXIT_USAGE } else { commands::EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
