use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    pub(crate) fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    #[inline]
    pub(crate) fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

/// One layer of the extrapolator. Convolutions use stride 1 and zero "same"
/// padding (`(kernel - 1) / 2` on the left, the rest on the right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LayerSpec {
    Conv1d { filters: usize, kernel: usize, activation: Activation },
    Flatten,
    Dense { units: usize, activation: Activation },
}

/// Per-example preprocessing applied before the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputNorm {
    None,
    /// Subtract the mean and divide by the standard deviation of `x_a`.
    #[default]
    Standardize,
}

/// Activation tensor shape between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// `channels` feature maps of `len` samples, stored channel-major.
    Map { channels: usize, len: usize },
    Flat(usize),
}

impl Shape {
    pub fn size(self) -> usize {
        match self {
            Shape::Map { channels, len } => channels * len,
            Shape::Flat(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawArchitecture", into = "RawArchitecture")]
pub struct ArchitectureSpec {
    layers: Vec<LayerSpec>,
    input_len: usize,
    output_len: usize,
    input_norm: InputNorm,
    rescale_output: bool,
    /// `shapes[i]` is the input shape of layer `i`; the last entry is the output.
    shapes: Vec<Shape>,
}

#[derive(Serialize, Deserialize)]
struct RawArchitecture {
    layers: Vec<LayerSpec>,
    input_len: usize,
    output_len: usize,
    #[serde(default)]
    input_norm: InputNorm,
    #[serde(default)]
    rescale_output: bool,
}

impl TryFrom<RawArchitecture> for ArchitectureSpec {
    type Error = Error;

    fn try_from(raw: RawArchitecture) -> Result<Self> {
        ArchitectureSpec::new(raw.layers, raw.input_len, raw.output_len)
            .map(|a| a.with_input_norm(raw.input_norm).with_output_rescale(raw.rescale_output))
    }
}

impl From<ArchitectureSpec> for RawArchitecture {
    fn from(a: ArchitectureSpec) -> Self {
        RawArchitecture {
            layers: a.layers,
            input_len: a.input_len,
            output_len: a.output_len,
            input_norm: a.input_norm,
            rescale_output: a.rescale_output,
        }
    }
}

impl ArchitectureSpec {
    /// Validate the layer chain for an `input_len -> output_len` map.
    pub fn new(layers: Vec<LayerSpec>, input_len: usize, output_len: usize) -> Result<Self> {
        if input_len == 0 || output_len == 0 {
            return Err(Error::Shape("input and output lengths must be positive".into()));
        }
        match layers.last() {
            Some(LayerSpec::Dense { units, activation: Activation::Linear }) if *units == output_len => {}
            other => {
                return Err(Error::Shape(format!(
                    "final layer must be Dense {{ units: {output_len}, activation: linear }}, got {other:?}"
                )))
            }
        }
        let mut shapes = vec![Shape::Map { channels: 1, len: input_len }];
        for (i, layer) in layers.iter().enumerate() {
            let current = *shapes.last().unwrap();
            let next = match (*layer, current) {
                (LayerSpec::Conv1d { filters, kernel, .. }, Shape::Map { len, .. }) => {
                    if filters == 0 || kernel == 0 {
                        return Err(Error::Shape(format!("layer {i}: empty convolution")));
                    }
                    Shape::Map { channels: filters, len }
                }
                (LayerSpec::Conv1d { .. }, Shape::Flat(_)) => {
                    return Err(Error::Shape(format!("layer {i}: convolution after flatten")))
                }
                (LayerSpec::Flatten, s) => Shape::Flat(s.size()),
                (LayerSpec::Dense { units, .. }, s) => {
                    if units == 0 {
                        return Err(Error::Shape(format!("layer {i}: dense layer with no units")));
                    }
                    if let Shape::Map { channels, .. } = s {
                        if channels != 1 {
                            return Err(Error::Shape(format!(
                                "layer {i}: dense layer on a {channels}-channel map needs a flatten first"
                            )));
                        }
                    }
                    Shape::Flat(units)
                }
            };
            shapes.push(next);
        }
        Ok(Self {
            layers,
            input_len,
            output_len,
            input_norm: InputNorm::default(),
            rescale_output: false,
            shapes,
        })
    }

    /// `Conv1d{32,5} -> Conv1d{64,7} -> Flatten -> Dense{output_len}`.
    pub fn desk(input_len: usize, output_len: usize) -> Self {
        Self::conv_stack(&[(32, 5), (64, 7)], input_len, output_len)
    }

    /// Five ReLU convolutions (32..512 filters, kernels 5..15), flatten and a
    /// linear dense head.
    pub fn full(input_len: usize, output_len: usize) -> Self {
        Self::conv_stack(&[(32, 5), (64, 7), (128, 11), (256, 13), (512, 15)], input_len, output_len)
    }

    fn conv_stack(convs: &[(usize, usize)], input_len: usize, output_len: usize) -> Self {
        let mut layers: Vec<LayerSpec> = convs
            .iter()
            .map(|&(filters, kernel)| LayerSpec::Conv1d { filters, kernel, activation: Activation::Relu })
            .collect();
        layers.push(LayerSpec::Flatten);
        layers.push(LayerSpec::Dense { units: output_len, activation: Activation::Linear });
        Self::new(layers, input_len, output_len).expect("conv stack is well formed")
    }

    pub fn with_input_norm(mut self, norm: InputNorm) -> Self {
        self.input_norm = norm;
        self
    }

    /// Map outputs back through the inverse of the input standardization.
    pub fn with_output_rescale(mut self, on: bool) -> Self {
        self.rescale_output = on;
        self
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn input_norm(&self) -> InputNorm {
        self.input_norm
    }

    pub fn rescale_output(&self) -> bool {
        self.rescale_output
    }

    pub(crate) fn input_shape(&self, layer: usize) -> Shape {
        self.shapes[layer]
    }

    /// `(weights, bias)` lengths per layer; zero for flatten.
    pub fn param_lens(&self) -> Vec<(usize, usize)> {
        self.layers
            .iter()
            .enumerate()
            .map(|(i, layer)| match *layer {
                LayerSpec::Conv1d { filters, kernel, .. } => {
                    let Shape::Map { channels, .. } = self.input_shape(i) else { unreachable!() };
                    (filters * channels * kernel, filters)
                }
                LayerSpec::Flatten => (0, 0),
                LayerSpec::Dense { units, .. } => (units * self.input_shape(i).size(), units),
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.param_lens().iter().map(|(w, b)| w + b).sum()
    }

    /// Compact human-readable form, e.g. `50 -> conv(32,5,relu) -> flatten -> dense(100,linear)`.
    pub fn describe(&self) -> String {
        let mut s = format!("{}", self.input_len);
        for layer in &self.layers {
            let act = |a: Activation| match a {
                Activation::Relu => "relu",
                Activation::Linear => "linear",
            };
            match layer {
                LayerSpec::Conv1d { filters, kernel, activation } => {
                    s += &format!(" -> conv({filters},{kernel},{})", act(*activation))
                }
                LayerSpec::Flatten => s += " -> flatten",
                LayerSpec::Dense { units, activation } => s += &format!(" -> dense({units},{})", act(*activation)),
            }
        }
        s
    }
}
