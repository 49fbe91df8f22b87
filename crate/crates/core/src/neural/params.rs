use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::arch::{Activation, ArchitectureSpec, LayerSpec};
use crate::rng;

/// Weights and bias of one layer. Conv weights are laid out
/// `[filter][in_channel][tap]`, dense weights `[unit][input]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Full parameter set of the extrapolator.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorParams {
    pub(crate) arch: ArchitectureSpec,
    pub(crate) layers: Vec<LayerParams>,
    pub(crate) init_seed: u64,
    /// Shuffle seed of the training run that produced these weights.
    pub shuffle_seed: Option<u64>,
    /// Number of sinusoids in the training data, when known.
    pub components: Option<usize>,
}

impl PredictorParams {
    /// Fan-in scaled normal weights for ReLU layers, `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`
    /// for linear layers, zero biases.
    pub fn init(arch: &ArchitectureSpec, seed: u64) -> Self {
        let mut stream = rng::stream(seed, &[rng::tag("init")]);
        let layers = arch
            .layers()
            .iter()
            .zip(arch.param_lens())
            .map(|(layer, (wlen, blen))| {
                let fan_in = match *layer {
                    LayerSpec::Flatten => 1,
                    _ => wlen / blen,
                };
                let activation = match *layer {
                    LayerSpec::Conv1d { activation, .. } | LayerSpec::Dense { activation, .. } => activation,
                    LayerSpec::Flatten => Activation::Linear,
                };
                let weights = match activation {
                    Activation::Relu => {
                        let std = (2.0 / fan_in as f64).sqrt();
                        (0..wlen)
                            .map(|_| std * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut stream))
                            .collect()
                    }
                    Activation::Linear => {
                        let a = 1.0 / (fan_in as f64).sqrt();
                        (0..wlen).map(|_| stream.random_range(-a..a)).collect()
                    }
                };
                LayerParams { weights, bias: vec![0.0; blen] }
            })
            .collect();
        Self { arch: arch.clone(), layers, init_seed: seed, shuffle_seed: None, components: None }
    }

    pub fn zeros(arch: &ArchitectureSpec) -> Self {
        Self {
            arch: arch.clone(),
            layers: zero_layers(arch),
            init_seed: 0,
            shuffle_seed: None,
            components: None,
        }
    }

    pub fn architecture(&self) -> &ArchitectureSpec {
        &self.arch
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Every parameter in declaration order (weights before bias per layer).
    pub fn flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_flat(&mut self, values: &[f64]) {
        let mut it = values.iter().copied();
        for layer in &mut self.layers {
            for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *v = it.next().expect("flat parameter vector too short");
            }
        }
        assert!(it.next().is_none(), "flat parameter vector too long");
    }
}

/// Gradient of a loss with respect to every parameter, same layout as
/// [`PredictorParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerParams>,
}

impl Gradients {
    pub fn zeros(arch: &ArchitectureSpec) -> Self {
        Self { layers: zero_layers(arch) }
    }

    pub fn flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub(crate) fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
    }
}

fn zero_layers(arch: &ArchitectureSpec) -> Vec<LayerParams> {
    arch.param_lens()
        .into_iter()
        .map(|(w, b)| LayerParams { weights: vec![0.0; w], bias: vec![0.0; b] })
        .collect()
}

fn flatten(layers: &[LayerParams]) -> Vec<f64> {
    layers
        .iter()
        .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
        .collect()
}
