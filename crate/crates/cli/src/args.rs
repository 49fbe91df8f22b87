//! Flag definitions. Every subcommand except `bench` also accepts
//! `--config FILE`: a TOML table with the same keys as the long flags
//! (underscores for dashes). Flags given on the command line win.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::Failure;
use freqpred::Error;

#[derive(Debug, Parser)]
#[command(name = "freqpred", version, about = "Predict-then-estimate frequency super-resolution")]
pub struct Cli {
    /// Maximum worker threads for data generation, training and sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a training dataset and its manifest.
    GenData(GenDataArgs),
    /// Train a predictor on a dataset.
    Train(TrainArgs),
    /// Extrapolate a samples file with trained weights.
    Predict(PredictArgs),
    /// Print estimated frequencies for a samples file.
    Estimate(EstimateArgs),
    /// Run a benchmark sweep described by a config file.
    Bench(BenchArgs),
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDataArgs {
    /// grid-l2, grid-l4, set1 .. set6; a comma-separated list is merged into one file
    #[arg(long)]
    pub recipe: Option<String>,
    /// Total window length N [default: 150]
    #[arg(long)]
    pub n: Option<usize>,
    /// Observed prefix length M [default: 50]
    #[arg(long)]
    pub m: Option<usize>,
    /// SNR in dB [default: 15]
    #[arg(long)]
    pub snr: Option<f64>,
    /// Noise draws per signal [default: recipe dependent]
    #[arg(long)]
    pub instances: Option<usize>,
    /// Signals drawn by the random sets [default: 20000]
    #[arg(long)]
    pub set_size: Option<usize>,
    /// Half-width of the uniform amplitude jitter around 1 [default: 0]
    #[arg(long)]
    pub amplitude_jitter: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dataset file; the manifest goes next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainArgs {
    /// Dataset file from gen-data
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// desk or full [default: desk]
    #[arg(long)]
    pub arch: Option<String>,
    /// [default: 50]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Mini-batch size [default: 50]
    #[arg(long)]
    pub batch: Option<usize>,
    /// Adam learning rate [default: 0.001]
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weight file; loss history is written to the same stem with `.loss.csv`
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictArgs {
    /// Samples file holding the M observed samples
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Output samples file
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateArgs {
    /// Samples file
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// esprit, prony or periodogram [default: esprit]
    #[arg(long)]
    pub method: Option<String>,
    /// Number of sinusoids
    #[arg(long)]
    pub l: Option<usize>,
    /// Extrapolate the input with these weights before estimating
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark config (TOML)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the config's master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the config's trial count
    #[arg(long)]
    pub trials: Option<usize>,
    /// Override the config's output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())).into())
}

macro_rules! layered {
    ($t:ty; $($f:ident),*) => {
        impl $t {
            /// Fill unset flags from `--config`.
            pub fn resolve(self) -> Result<Self, Failure> {
                let Some(path) = self.config.clone() else { return Ok(self) };
                let file: Self = read_toml(&path)?;
                Ok(Self { config: self.config, $($f: self.$f.or(file.$f)),* })
            }
        }
    };
}

layered!(GenDataArgs; recipe, n, m, snr, instances, set_size, amplitude_jitter, seed, out);
layered!(TrainArgs; data, arch, epochs, batch, lr, seed, out);
layered!(PredictArgs; input, weights, out);
layered!(EstimateArgs; input, method, l, weights);
