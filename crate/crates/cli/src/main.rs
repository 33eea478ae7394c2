use std::path::PathBuf;
use std::process::ExitCode;

use areasim_cli::config::{apply_overrides, load_config, Experiment};
use areasim_cli::runner::{run_experiment, RunnerError};
use clap::Parser;

/// Deterministic driver for the area-level spiking-network experiments.
#[derive(Parser, Debug)]
#[command(name = "areasim", version, about)]
struct Cli {
    /// Experiment config, one JSON document
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Override the experiment named in the config
    #[arg(long, value_enum, value_name = "NAME")]
    experiment: Option<Experiment>,

    /// Override the output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Override the seed list (comma separated)
    #[arg(long, value_delimiter = ',', value_name = "SEEDS")]
    seeds: Option<Vec<u64>>,

    /// Suppress progress output
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match load_config(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("areasim: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = apply_overrides(&mut cfg, cli.experiment, cli.out, cli.seeds) {
        eprintln!("areasim: {e}");
        return ExitCode::from(2);
    }
    match run_experiment(&cfg, cli.quiet) {
        Ok(report) => {
            if !cli.quiet {
                eprintln!(
                    "[areasim] {} runs complete; artifacts in {}",
                    report.n_runs,
                    report.output_dir.display()
                );
            }
            ExitCode::SUCCESS
        }
        Err(RunnerError::Config(e)) => {
            eprintln!("areasim: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("areasim: {e}");
            ExitCode::FAILURE
        }
    }
}
