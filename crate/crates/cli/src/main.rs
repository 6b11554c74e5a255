use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crossbow_cli::config::{ExperimentConfig, Mode};
use crossbow_cli::{modes, CliError};

#[derive(Parser)]
#[command(
    name = "crossbow",
    version,
    about = "Multi-objective design-space exploration for crossbar compute-in-memory accelerators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured optimization (mode `bo` or `baseline`), one
    /// directory per seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replace the config's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact hypervolume of a Pareto-front CSV against a reference point
    /// given in raw objective units.
    Hv {
        #[arg(long)]
        front: PathBuf,
        #[arg(
            long = "ref",
            value_name = "V1,..,VM",
            value_delimiter = ',',
            required = true
        )]
        reference: Vec<f64>,
    },
    /// One-factor-at-a-time sweep of uniform designs (mode `sweep`).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iso-budget comparison of BO against the evolutionary baseline
    /// (mode `compare`).
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CROSSBOW_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let config = ExperimentConfig::from_path(&config)?;
            match config.mode {
                Mode::Bo | Mode::Baseline => modes::run_experiment(&config, seed, out.as_deref()),
                other => Err(CliError::config(format!(
                    "config mode '{other}' has its own subcommand; use `crossbow {other}`"
                ))),
            }
        }
        Command::Hv { front, reference } => {
            let hv = modes::front_hypervolume(&front, &reference)?;
            println!("{hv:?}");
            Ok(())
        }
        Command::Sweep { config, out } => {
            let config = ExperimentConfig::from_path(&config)?;
            if config.mode != Mode::Sweep {
                return Err(CliError::config(
                    "the sweep subcommand needs mode = \"sweep\" in the config",
                ));
            }
            modes::run_experiment(&config, None, out.as_deref())
        }
        Command::Compare { config, out } => {
            let config = ExperimentConfig::from_path(&config)?;
            if config.mode != Mode::Compare {
                return Err(CliError::config(
                    "the compare subcommand needs mode = \"compare\" in the config",
                ));
            }
            modes::run_experiment(&config, None, out.as_deref())
        }
    }
}
