//! TOML description of a benchmark run.
//!
//! ```toml
//! name = "snr"
//! n = 150
//! m = 50
//! seed = 1
//! trials = 1000
//! out_dir = "out/snr"
//!
//! [[methods]]
//! id = "m1"
//! estimator = "esprit"
//!
//! [[methods]]
//! id = "m3"
//! predictor = { kind = "linear", order = 4 }
//!
//! [sweep]
//! kind = "snr"
//! snr_db = [0, 5, 10, 15, 20, 25]
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    grid_experiment_l4, resolution_sweep, snr_sweep, ExperimentResult, Extrapolator, FrequencySampler, MethodId,
    MethodSpec, Scenario,
};
use crate::datagen::{generate, DatasetRecipe, RecipeId};
use crate::error::{Error, Result};
use crate::hrse::Estimator;
use crate::neural::{load_params, train, ArchitectureSpec, TrainConfig, TrainError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    pub trials: usize,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    pub methods: Vec<MethodConfig>,
    pub sweep: SweepConfig,
}

fn default_name() -> String {
    "bench".into()
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub id: MethodId,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub predictor: Option<PredictorConfig>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PredictorConfig {
    Linear {
        #[serde(default)]
        order: Option<usize>,
        #[serde(default)]
        stabilize: bool,
    },
    /// Load trained weights.
    Neural { weights: PathBuf },
    /// Generate a training set and train before benchmarking.
    NeuralTrain {
        recipes: Vec<String>,
        #[serde(default = "default_train_snr")]
        snr_db: f64,
        #[serde(default)]
        noise_instances: Option<usize>,
        #[serde(default)]
        set_size: Option<usize>,
        #[serde(default = "default_arch")]
        arch: String,
        #[serde(default)]
        train: TrainConfig,
    },
}

fn default_train_snr() -> f64 {
    15.0
}

fn default_arch() -> String {
    "desk".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SweepConfig {
    Snr {
        snr_db: Vec<f64>,
        /// Defaults to two uniform frequencies separated by at least `1/N`.
        #[serde(default)]
        sampler: Option<FrequencySampler>,
    },
    Resolution {
        deltas: Vec<f64>,
        #[serde(default = "default_resolution_snr")]
        snr_db: f64,
    },
    L4Grid {
        snr_db: Vec<f64>,
        on_grid: bool,
    },
}

fn default_resolution_snr() -> f64 {
    20.0
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn components(&self) -> usize {
        match &self.sweep {
            SweepConfig::Snr { sampler: Some(s), .. } => s.components(),
            SweepConfig::Snr { sampler: None, .. } | SweepConfig::Resolution { .. } => 2,
            SweepConfig::L4Grid { .. } => 4,
        }
    }

    /// Rewrite relative paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if self.out_dir.is_relative() {
            self.out_dir = base.join(&self.out_dir);
        }
        for m in &mut self.methods {
            if let Some(PredictorConfig::Neural { weights }) = &mut m.predictor {
                if weights.is_relative() {
                    *weights = base.join(&*weights);
                }
            }
        }
    }

    fn build_methods(&self) -> Result<Vec<MethodSpec>> {
        let scenario = Scenario { n: self.n, m: self.m };
        scenario.validate()?;
        if self.methods.is_empty() {
            return Err(Error::Config("no methods configured".into()));
        }
        let l = self.components();
        self.methods
            .iter()
            .enumerate()
            .map(|(i, mc)| {
                let predictor = match (&mc.predictor, mc.id) {
                    (None, MethodId::M3PredictThenEstimate) => {
                        return Err(Error::Config(format!("method {} (m3) needs a predictor", i + 1)))
                    }
                    (None, _) => None,
                    (Some(p), _) => Some(build_predictor(p, scenario, l, self.seed, i)?),
                };
                let mut spec = MethodSpec { id: mc.id, estimator: mc.estimator, predictor, label: None };
                if let Some(label) = &mc.label {
                    spec = spec.with_label(label.clone());
                }
                spec.validate(scenario, l)?;
                Ok(spec)
            })
            .collect()
    }
}

fn build_predictor(p: &PredictorConfig, scenario: Scenario, l: usize, seed: u64, index: usize) -> Result<Extrapolator> {
    match p {
        PredictorConfig::Linear { order, stabilize } => {
            Ok(Extrapolator::LinearPrediction { order: *order, stabilize: *stabilize })
        }
        PredictorConfig::Neural { weights } => Ok(Extrapolator::Neural(Arc::new(load_params(weights)?))),
        PredictorConfig::NeuralTrain { recipes, snr_db, noise_instances, set_size, arch, train: cfg } => {
            if recipes.is_empty() {
                return Err(Error::Config("neural-train needs at least one recipe".into()));
            }
            let data_seed = crate::rng::derive_seed(seed, &[crate::rng::tag("train-data"), index as u64]);
            let mut dataset: Option<crate::datagen::Dataset> = None;
            for name in recipes {
                let id: RecipeId = name.parse()?;
                let mut recipe = DatasetRecipe::new(id, scenario.n, scenario.m, data_seed);
                recipe.snr_db = *snr_db;
                if let Some(k) = noise_instances {
                    recipe.noise_instances = *k;
                }
                if let Some(s) = set_size {
                    recipe.set_size = *s;
                }
                let part = generate(&recipe)?;
                dataset = Some(match dataset {
                    None => part,
                    Some(d) => d.merge(part)?,
                });
            }
            let dataset = dataset.expect("at least one recipe");
            let out = scenario.n - scenario.m;
            let spec = match arch.as_str() {
                "desk" => ArchitectureSpec::desk(scenario.m, out),
                "full" => ArchitectureSpec::full(scenario.m, out),
                other => return Err(Error::Config(format!("unknown architecture '{other}'"))),
            };
            let mut params = match train(&dataset.pairs(), &spec, cfg) {
                Ok(t) => t.params,
                Err(TrainError::Invalid(e)) => return Err(e),
                Err(TrainError::Diverged(d)) => {
                    return Err(Error::Config(format!("predictor training diverged in epoch {}", d.epoch + 1)))
                }
            };
            params.components = Some(l);
            Ok(Extrapolator::Neural(Arc::new(params)))
        }
    }
}

/// Read a config file and resolve its relative paths.
pub fn load_config(path: &Path) -> Result<BenchConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = BenchConfig::parse(&text)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

/// Build methods (training any inline predictors) and run the sweep.
pub fn run_config(cfg: &BenchConfig) -> Result<ExperimentResult> {
    let methods = cfg.build_methods()?;
    let scenario = Scenario { n: cfg.n, m: cfg.m };
    let mut result = match &cfg.sweep {
        SweepConfig::Snr { snr_db, sampler } => {
            let sampler = sampler.unwrap_or(FrequencySampler::Uniform { l: 2, min_sep: 1.0 / cfg.n as f64 });
            snr_sweep(&methods, scenario, snr_db, cfg.trials, sampler, cfg.seed)?
        }
        SweepConfig::Resolution { deltas, snr_db } => {
            resolution_sweep(&methods, scenario, deltas, *snr_db, cfg.trials, cfg.seed)?
        }
        SweepConfig::L4Grid { snr_db, on_grid } => {
            grid_experiment_l4(&methods, scenario, snr_db, *on_grid, cfg.trials, cfg.seed)?
        }
    };
    result.name = cfg.name.clone();
    Ok(result)
}
