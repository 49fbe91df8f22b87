use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::adam::Adam;
use super::arch::ArchitectureSpec;
use super::params::PredictorParams;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub init_seed: u64,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 50,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            init_seed: 0,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::param("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) || !(self.adam_eps > 0.0) {
            return Err(Error::param("Adam betas must lie in [0, 1) and eps must be positive"));
        }
        Ok(())
    }
}

/// Training aborted because the loss stopped being finite.
#[derive(Debug)]
pub struct Diverged {
    /// Zero-based epoch in which the loss blew up.
    pub epoch: usize,
    /// Parameters at the end of the last finite epoch (the initial
    /// parameters if the first epoch diverged).
    pub checkpoint: PredictorParams,
    pub history: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("training diverged in epoch {}", .0.epoch + 1)]
    Diverged(Box<Diverged>),
}

/// Result of a successful run.
#[derive(Debug, Clone)]
pub struct Trained {
    pub params: PredictorParams,
    /// Mean per-example loss over each epoch's mini-batches.
    pub history: Vec<f64>,
}

/// Train with Adam over shuffled mini-batches.
///
/// The loss of a batch is the summed squared error; each step uses its
/// gradient divided by the batch length.
pub fn train(
    data: &[(&[f64], &[f64])],
    arch: &ArchitectureSpec,
    cfg: &TrainConfig,
) -> Result<Trained, TrainError> {
    train_with(data, arch, cfg, |_, _| {})
}

/// [`train`] with a callback receiving `(epoch, mean loss)` after each epoch.
pub fn train_with(
    data: &[(&[f64], &[f64])],
    arch: &ArchitectureSpec,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<Trained, TrainError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::param("training set is empty").into());
    }
    if let Some((x, y)) = data
        .iter()
        .find(|(x, y)| x.len() != arch.input_len() || y.len() != arch.output_len())
    {
        return Err(Error::Shape(format!(
            "example lengths ({}, {}) do not match architecture ({}, {})",
            x.len(),
            y.len(),
            arch.input_len(),
            arch.output_len()
        ))
        .into());
    }

    let mut params = PredictorParams::init(arch, cfg.init_seed);
    params.shuffle_seed = Some(cfg.shuffle_seed);
    let mut adam = Adam::new(&params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    let mut checkpoint = params.clone();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch: Vec<(&[f64], &[f64])> = Vec::with_capacity(cfg.batch_size);

    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::stream(cfg.shuffle_seed, &[rng::tag("shuffle"), epoch as u64]));
        let mut epoch_loss = 0.0;
        let mut diverged = false;
        for idx in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(idx.iter().map(|&i| data[i]));
            let (loss, grads) = match params.loss_and_gradients(&batch) {
                Ok(v) => v,
                Err(Error::NonFinite { .. }) => {
                    diverged = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            epoch_loss += loss;
            adam.step(&mut params, &grads, 1.0 / batch.len() as f64);
        }
        let mean = epoch_loss / data.len() as f64;
        if diverged || !mean.is_finite() || !params.is_finite() {
            return Err(TrainError::Diverged(Box::new(Diverged { epoch, checkpoint, history })));
        }
        history.push(mean);
        on_epoch(epoch, mean);
        checkpoint.clone_from(&params);
    }
    Ok(Trained { params, history })
}
