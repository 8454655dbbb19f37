mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edgelat::archspace::PositionRange;
use edgelat::counters::CounterMode;
use edgelat::harness::{Method, Pooling};
use edgelat::sampler::SamplingStrategy;

use config::ConfigError;

#[derive(Debug, Parser)]
#[command(
    name = "edgelat",
    version,
    about = "Few-shot latency prediction for edge device runtimes"
)]
struct Cli {
    /// Root seed; overrides `seed` in the config document.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path of the command's main artifact.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML experiment document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for trials and dataset generation.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override fields of the `[experiment]` section.
#[derive(Debug, Clone, Default, Args)]
struct Overrides {
    #[arg(long)]
    test_device: Option<String>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    pooling: Option<Pooling>,
    #[arg(long)]
    strategy: Option<SamplingStrategy>,
    #[arg(long)]
    normalization: Option<CounterMode>,
    #[arg(long)]
    n_adapt: Option<usize>,
    #[arg(long)]
    k_augment: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    train_range: Option<PositionRange>,
    #[arg(long)]
    test_range: Option<PositionRange>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic device pool and write its dataset file.
    GenPool,
    /// Validate an externally collected dataset file.
    Import { input: PathBuf },
    /// Train the model of one trial and save it.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Predict end-to-end latency of architectures on a dataset device.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        device: String,
        /// Canonical architecture indices, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "positions")]
        archs: Vec<usize>,
        /// Benchmark positions `lo..hi`.
        #[arg(long)]
        positions: Option<PositionRange>,
    },
    /// Run the seeded trials of one experiment.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// CSV of the last trial's (arch, predicted, true) pairs.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Cumulative component ablation per pooling mode.
    Ablate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long = "poolings", value_delimiter = ',')]
        poolings: Vec<Pooling>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Accuracy over adaptation counts and augmentation factors.
    Sweep {
        #[arg(long = "n", value_delimiter = ',')]
        n_values: Vec<usize>,
        #[arg(long = "k", value_delimiter = ',')]
        k_values: Vec<usize>,
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    use edgelat::Error as E;
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Config(_) | E::Range(_) | E::Calibration(_) => EXIT_CONFIG,
                E::Parse { .. } | E::Data(_) | E::Referential(_) | E::Structural(_) | E::Io(_) => EXIT_DATA,
                E::Domain(_) => EXIT_RUNTIME,
            };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_DATA;
        }
    }
    EXIT_RUNTIME
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
