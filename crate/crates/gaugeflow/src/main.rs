use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaugeflow::scenario;

/// Scenario front end for the gaugeflow library.
///
/// Exit status: 0 when every check passes, 1 when the run finishes but a
/// check fails its tolerance, 2 for configuration or I/O errors.
#[derive(Parser)]
#[command(name = "gaugeflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config file.
    Run {
        config: PathBuf,
        /// Write CSV files and snapshots here instead of the configured dir.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the number of steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Override the time step.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// List the runnable scenarios.
    List,
    /// Validate a config file without running it.
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> gaugeflow::Result<ExitCode> {
    match cli.command {
        Command::List => {
            for info in scenario::list_scenarios() {
                println!("{:<32} {}", info.name, info.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { config } => {
            let cfg = scenario::load_config(&config)?;
            scenario::check_config(&cfg)?;
            println!("ok: {} ({})", config.display(), cfg.scenario);
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            output_dir,
            steps,
            dt,
        } => {
            let cfg = scenario::load_config(&config)?.with_overrides(output_dir, steps, dt);
            let report = scenario::run_scenario(&cfg)?;
            print!("{}", report.render());
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
