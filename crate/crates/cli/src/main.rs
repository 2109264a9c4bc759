use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod table;

/// Information-plane experiments and estimators.
#[derive(Debug, Parser)]
#[command(name = "infoplane", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment config and write trajectory CSVs plus a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `output_dir`).
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated seeds replacing the config's list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Maximum number of seeds trained concurrently.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Plugin mutual information between binned columns of a CSV, in bits.
    Mi {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated feature columns (binned jointly).
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        #[arg(long)]
        y: String,
        #[arg(long)]
        bins: usize,
        /// Column of non-negative sample masses.
        #[arg(long)]
        weights: Option<String>,
    },
    /// IB-style objective terms of feature columns against a prediction/label pair.
    Synergy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        /// Prediction column (categorical); needed for gib and svw.
        #[arg(long)]
        z: Option<String>,
        /// Label column (categorical).
        #[arg(long)]
        y: String,
        #[arg(long)]
        bins: usize,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Trade-off parameter, a positive number or `inf`.
        #[arg(long, default_value = "1")]
        beta: String,
    },
    /// Generate a dataset CSV and its provenance sidecar.
    Datagen {
        /// simple_function, binary_classification or force_to_one.
        #[arg(long = "gen")]
        generator: String,
        /// Generator parameters as key=value, comma-separated or repeated.
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the version.
    Version,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Gib,
    Svw,
    Syn,
}

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<infoplane::Error> for Failure {
    fn from(e: infoplane::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            seeds,
            jobs,
        } => commands::run(&config, out, seeds, jobs),
        Command::Mi {
            input,
            x,
            y,
            bins,
            weights,
        } => commands::mi(&input, &x, &y, bins, weights.as_deref()),
        Command::Synergy {
            input,
            x,
            z,
            y,
            bins,
            kind,
            beta,
        } => commands::synergy(&input, &x, z.as_deref(), &y, bins, kind, &beta),
        Command::Datagen {
            generator,
            params,
            seed,
            out,
        } => commands::datagen(&generator, &params, seed, &out),
        Command::Version => {
            println!("infoplane {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
