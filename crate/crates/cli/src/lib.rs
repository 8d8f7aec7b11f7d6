//! Command-line experiment harness for `anonsched`.
//!
//! Three subcommands, all writing CSV preceded by `#` comment lines that
//! record the full configuration:
//!
//! - `analytic`: exact outage and overhead over a parameter grid;
//! - `simulate`: Monte Carlo attacks and full supersession runs;
//! - `validate`: exhaustive enumeration against the closed forms.
//!
//! Exit status is 0 on success, 1 when validation finds a mismatch or a run
//! fails, and 2 for usage errors.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::{Parser, Subcommand};

use commands::analytic::AnalyticArgs;
use commands::simulate::SimulateArgs;
use commands::validate::ValidateArgs;
pub use error::{CliError, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "anonsched", version, about = "Identity-hiding scheduling simulator and exact analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact outage and overhead over a parameter grid.
    Analytic(AnalyticArgs),
    /// Monte Carlo eavesdropper and full supersession runs.
    Simulate(SimulateArgs),
    /// Brute-force enumeration against the closed forms.
    Validate(ValidateArgs),
}

fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match path {
        None => body(stdout),
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            let result = body(&mut file);
            file.flush()?;
            result
        }
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Analytic(a) => with_output(a.out.as_deref(), stdout, |w| commands::analytic::run(a, w)),
        Command::Simulate(a) => with_output(a.out.as_deref(), stdout, |w| commands::simulate::run(a, w)),
        Command::Validate(a) => with_output(a.out.as_deref(), stdout, |w| commands::validate::run(a, w)),
    }
}

/// Parses `args`, runs the command and returns the exit status. Diagnostics
/// go to `stderr`.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
