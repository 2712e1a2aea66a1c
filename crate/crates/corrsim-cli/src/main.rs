mod config;
mod pipeline;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Batch pipelines reproducing the error-correlation analyses: simulation,
/// variance scaling, fitting, scans and analytic predictions.
#[derive(Debug, Parser)]
#[command(name = "corrsim", version, about)]
struct Cli {
    /// Experiment config file (key=value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (0 = auto).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the random circuits and write circuits.csv.
    GenCircuits,
    /// Run the full k×n simulation grid and write records.csv.
    Simulate,
    /// Compute cumulative variance trajectories from records.csv.
    Variance,
    /// Fit error strengths to the mean variance trajectory.
    Fit,
    /// Fixed-sigma_L2 AIC/BIC likelihood scan around the best fit.
    Scan,
    /// Compare the first-order walk against exact propagation.
    WalkCheck,
    /// Error-vector autocorrelation vs block length.
    Acf,
    /// Dephasing filter functions of the three gate families.
    Ff,
    /// Analytic predictions: Gamma parameters and variance-model curve.
    Predict,
    /// Dump the Clifford table and the pulse schedules.
    DumpGates,
    /// Dump one sampled noise trace (circuit 0, realization 0).
    DumpTrace,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .expect("thread pool is initialized once");
    }

    let config = match &cli.config {
        Some(path) => match config::ExperimentConfig::from_file(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(2);
            }
        },
        None => config::ExperimentConfig::default(),
    };
    let mut config = config;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }

    let result = match cli.command {
        Command::GenCircuits => pipeline::gen_circuits(&config, &cli.out),
        Command::Simulate => pipeline::simulate(&config, &cli.out),
        Command::Variance => pipeline::variance(&config, &cli.out),
        Command::Fit => pipeline::fit(&config, &cli.out),
        Command::Scan => pipeline::scan(&config, &cli.out),
        Command::WalkCheck => pipeline::walk_check(&config, &cli.out),
        Command::Acf => pipeline::acf(&config, &cli.out),
        Command::Ff => pipeline::ff(&config, &cli.out),
        Command::Predict => pipeline::predict(&config, &cli.out),
        Command::DumpGates => pipeline::dump_gates(&config, &cli.out),
        Command::DumpTrace => pipeline::dump_trace(&config, &cli.out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
