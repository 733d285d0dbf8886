//! Batch pipeline: argument parsing, configuration and the subcommands.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::{run, Outcome};
pub use config::PipelineConfig;

use crate::bootstrap::BootstrapError;
use crate::dataset::DatasetError;
use crate::fit::FitError;
use crate::lingam::LingamError;
use crate::stats::StatsError;
use crate::synth::SynthError;

#[derive(Debug, Parser)]
#[command(name = "lingam-pipeline", version, about = "Causal discovery and condition comparison for per-trial experiment data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Json,
    #[default]
    Text,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Graph {
    #[default]
    Model,
    Bootstrap,
}

/// Flags shared by every pipeline subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Trial table (delimited text with a header row).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub bootstrap_count: Option<usize>,
    #[arg(long)]
    pub prune_threshold: Option<f64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Rendering printed to stdout; artifact files are always written in every format.
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Descriptive statistics, Spearman correlations and VIF.
    Describe(CommonArgs),
    /// Fit the causal model with the configured prior knowledge.
    Discover(CommonArgs),
    /// Bootstrap the discovery and prune unreliable edges.
    Bootstrap(CommonArgs),
    /// Median total effects from the bootstrap artifact.
    Effects(CommonArgs),
    /// SEM fit indices of the discovered and bootstrapped models.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// Score given statistics instead of data: chi2,dof,chi2_baseline,dof_baseline,n.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        replay: Option<Vec<f64>>,
    },
    /// Friedman tests and pairwise Wilcoxon post-hoc tests across conditions.
    Compare(CommonArgs),
    /// Print a stored graph as DOT.
    ExportDot {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t)]
        graph: Graph,
    },
    /// Write a synthetic trial table drawn from a known nine-variable model.
    GenerateFixture {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the ground-truth model as JSON.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing artifact {0}; run the producing subcommand first")]
    MissingArtifact(PathBuf),
    #[error("data: {0}")]
    Data(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl CliError {
    /// 2 configuration, 3 file access, 4 data validation, 5 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::MissingArtifact(_) => 3,
            CliError::Data(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { path, source } => CliError::Io { path, source },
            DatasetError::UnknownColumn(_) | DatasetError::DuplicateColumn(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::MissingCell { .. } | StatsError::Ragged { .. } | StatsError::EmptySample | StatsError::TooSmall { .. } => {
                CliError::Data(e.to_string())
            }
            StatsError::DuplicateCondition(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<LingamError> for CliError {
    fn from(e: LingamError) -> Self {
        match e {
            LingamError::Data(d) => d.into(),
            LingamError::Stats(s) => s.into(),
            LingamError::InvalidPrior(_) | LingamError::UnknownVariable(_) | LingamError::Unsatisfiable { .. } => {
                CliError::Config(e.to_string())
            }
            LingamError::TooFewObservations { .. } | LingamError::TooFewVariables(_) | LingamError::NonFinite => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<BootstrapError> for CliError {
    fn from(e: BootstrapError) -> Self {
        match e {
            BootstrapError::Lingam(l) => l.into(),
            BootstrapError::Threshold(_) | BootstrapError::NoRuns => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::Data(d) => d.into(),
            FitError::Lingam(l) => l.into(),
            FitError::TooFewObservations { .. } => CliError::Data(e.to_string()),
            FitError::BaselineDof | FitError::SampleSize => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Data(d) => d.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Worker-thread override from the `THREADS` environment variable.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("THREADS") {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("THREADS must be a positive integer, got `{v}`"))),
        },
    }
}
