use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use granular_cli::{oracle, output_dir, run, validate, CliError, RunConfig};

/// Particle simulations of pressureless flow under a maximal density constraint.
#[derive(Parser)]
#[command(name = "granular", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write Lagrangian, Eulerian and summary files.
    Run { config: PathBuf },
    /// Parse a configuration and check its initial state.
    Validate { config: PathBuf },
    /// Write the exact two-block solution at the output times.
    Oracle { config: PathBuf },
}

fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let summary = run(&cfg, &output_dir(&cfg))?;
            Ok(serde_json::to_string(&summary).expect("summary serializes"))
        }
        Command::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            Ok(serde_json::to_string(&validate(&cfg)?).expect("report serializes"))
        }
        Command::Oracle { config } => {
            let cfg = RunConfig::load(&config)?;
            let path = oracle(&cfg, &output_dir(&cfg))?;
            Ok(serde_json::json!({ "exact": path }).to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            // a closed stdout (e.g. piped into `head`) is not a failure of the run
            let _ = writeln!(std::io::stdout(), "{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::to_string(&e.record()).expect("error record serializes")
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
