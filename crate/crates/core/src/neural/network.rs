//! Forward and backward passes.

use rayon::prelude::*;

use super::arch::{Activation, InputNorm, LayerSpec, Shape};
use super::params::{Gradients, LayerParams, PredictorParams};
use crate::error::{Error, Result};

/// Examples per gradient chunk. Chunks are reduced in index order, so the
/// summed gradient does not depend on the number of worker threads.
const GRAD_CHUNK: usize = 8;

/// Per-example input statistics used by standardization.
#[derive(Debug, Clone, Copy)]
struct Scaling {
    mean: f64,
    std: f64,
}

fn scaling(norm: InputNorm, x: &[f64]) -> Scaling {
    match norm {
        InputNorm::None => Scaling { mean: 0.0, std: 1.0 },
        InputNorm::Standardize => {
            let n = x.len() as f64;
            let mean = x.iter().sum::<f64>() / n;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            Scaling { mean, std: if std > 0.0 { std } else { 1.0 } }
        }
    }
}

/// Cached activations of one forward pass.
struct Trace {
    /// `inputs[i]` feeds layer `i`.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of each layer (empty for flatten).
    preacts: Vec<Vec<f64>>,
    scaling: Scaling,
}

fn same_pad_left(kernel: usize) -> usize {
    (kernel - 1) / 2
}

fn conv_forward(p: &LayerParams, input: &[f64], channels: usize, len: usize, filters: usize, kernel: usize) -> Vec<f64> {
    let pl = same_pad_left(kernel) as isize;
    let mut out = vec![0.0; filters * len];
    for f in 0..filters {
        let row = &mut out[f * len..(f + 1) * len];
        row.fill(p.bias[f]);
        for c in 0..channels {
            let src = &input[c * len..(c + 1) * len];
            let taps = &p.weights[(f * channels + c) * kernel..(f * channels + c + 1) * kernel];
            for (j, &w) in taps.iter().enumerate() {
                // out[t] += w * src[t + j - pl]
                let off = j as isize - pl;
                let t0 = (-off).max(0) as usize;
                let t1 = (len as isize - off).min(len as isize).max(0) as usize;
                if t0 >= t1 {
                    continue;
                }
                let s0 = (t0 as isize + off) as usize;
                for (o, s) in row[t0..t1].iter_mut().zip(&src[s0..s0 + (t1 - t0)]) {
                    *o += w * s;
                }
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn conv_backward(
    p: &LayerParams,
    g: &mut LayerParams,
    input: &[f64],
    dz: &[f64],
    channels: usize,
    len: usize,
    filters: usize,
    kernel: usize,
    need_input_grad: bool,
) -> Vec<f64> {
    let pl = same_pad_left(kernel) as isize;
    let mut din = if need_input_grad { vec![0.0; channels * len] } else { Vec::new() };
    for f in 0..filters {
        let dzf = &dz[f * len..(f + 1) * len];
        g.bias[f] += dzf.iter().sum::<f64>();
        for c in 0..channels {
            let src = &input[c * len..(c + 1) * len];
            let base = (f * channels + c) * kernel;
            for j in 0..kernel {
                let off = j as isize - pl;
                let t0 = (-off).max(0) as usize;
                let t1 = (len as isize - off).min(len as isize).max(0) as usize;
                if t0 >= t1 {
                    continue;
                }
                let s0 = (t0 as isize + off) as usize;
                let n = t1 - t0;
                g.weights[base + j] += dzf[t0..t1].iter().zip(&src[s0..s0 + n]).map(|(a, b)| a * b).sum::<f64>();
                if need_input_grad {
                    let w = p.weights[base + j];
                    for (d, z) in din[c * len + s0..c * len + s0 + n].iter_mut().zip(&dzf[t0..t1]) {
                        *d += w * z;
                    }
                }
            }
        }
    }
    din
}

fn dense_forward(p: &LayerParams, input: &[f64], units: usize) -> Vec<f64> {
    let n = input.len();
    (0..units)
        .map(|o| p.bias[o] + p.weights[o * n..(o + 1) * n].iter().zip(input).map(|(w, x)| w * x).sum::<f64>())
        .collect()
}

fn dense_backward(p: &LayerParams, g: &mut LayerParams, input: &[f64], dz: &[f64], need_input_grad: bool) -> Vec<f64> {
    let n = input.len();
    let mut din = if need_input_grad { vec![0.0; n] } else { Vec::new() };
    for (o, &d) in dz.iter().enumerate() {
        g.bias[o] += d;
        if d == 0.0 {
            continue;
        }
        for (gw, x) in g.weights[o * n..(o + 1) * n].iter_mut().zip(input) {
            *gw += d * x;
        }
        if need_input_grad {
            for (di, w) in din.iter_mut().zip(&p.weights[o * n..(o + 1) * n]) {
                *di += d * w;
            }
        }
    }
    din
}

impl PredictorParams {
    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arch.input_len() {
            return Err(Error::Shape(format!(
                "input has {} samples, network expects {}",
                x.len(),
                self.arch.input_len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("input contains non-finite samples"));
        }
        Ok(())
    }

    fn run(&self, x: &[f64]) -> Result<(Vec<f64>, Trace)> {
        self.check_input(x)?;
        let arch = &self.arch;
        let scaling = scaling(arch.input_norm(), x);
        let mut current: Vec<f64> = x.iter().map(|v| (v - scaling.mean) / scaling.std).collect();
        let mut inputs = Vec::with_capacity(arch.layers().len());
        let mut preacts = Vec::with_capacity(arch.layers().len());

        for (i, (layer, p)) in arch.layers().iter().zip(&self.layers).enumerate() {
            let (z, act) = match (*layer, arch.input_shape(i)) {
                (LayerSpec::Conv1d { filters, kernel, activation }, Shape::Map { channels, len }) => {
                    (conv_forward(p, &current, channels, len, filters, kernel), activation)
                }
                (LayerSpec::Dense { units, activation }, _) => (dense_forward(p, &current, units), activation),
                (LayerSpec::Flatten, _) => {
                    inputs.push(Vec::new());
                    preacts.push(Vec::new());
                    continue;
                }
                (LayerSpec::Conv1d { .. }, Shape::Flat(_)) => unreachable!("validated at construction"),
            };
            let a: Vec<f64> = z.iter().map(|v| act.apply(*v)).collect();
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { layer: i });
            }
            inputs.push(std::mem::replace(&mut current, a));
            preacts.push(z);
        }
        if arch.rescale_output() {
            for v in &mut current {
                *v = *v * scaling.std + scaling.mean;
            }
        }
        Ok((current, Trace { inputs, preacts, scaling }))
    }

    /// Predicted continuation `G(x_a)`.
    pub fn forward(&self, x_a: &[f64]) -> Result<Vec<f64>> {
        self.run(x_a).map(|(y, _)| y)
    }

    /// Accumulate `d loss / d theta` for one example given `d loss / d output`.
    fn backward(&self, trace: &Trace, mut grad: Vec<f64>, into: &mut Gradients) {
        let arch = &self.arch;
        if arch.rescale_output() {
            for g in &mut grad {
                *g *= trace.scaling.std;
            }
        }
        for i in (0..arch.layers().len()).rev() {
            let need_input_grad = i > 0;
            let p = &self.layers[i];
            let g = &mut into.layers[i];
            grad = match (arch.layers()[i], arch.input_shape(i)) {
                (LayerSpec::Flatten, _) => continue,
                (LayerSpec::Conv1d { filters, kernel, activation }, Shape::Map { channels, len }) => {
                    apply_activation_grad(&mut grad, &trace.preacts[i], activation);
                    conv_backward(p, g, &trace.inputs[i], &grad, channels, len, filters, kernel, need_input_grad)
                }
                (LayerSpec::Dense { activation, .. }, _) => {
                    apply_activation_grad(&mut grad, &trace.preacts[i], activation);
                    dense_backward(p, g, &trace.inputs[i], &grad, need_input_grad)
                }
                (LayerSpec::Conv1d { .. }, Shape::Flat(_)) => unreachable!("validated at construction"),
            };
        }
    }

    /// Summed squared error `sum_i ||x_m,i - G(x_a,i)||^2` over the batch and
    /// its exact gradient.
    pub fn loss_and_gradients(&self, batch: &[(&[f64], &[f64])]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::param("empty batch"));
        }
        let out_len = self.arch.output_len();
        if let Some((_, y)) = batch.iter().find(|(_, y)| y.len() != out_len) {
            return Err(Error::Shape(format!("target has {} samples, network produces {out_len}", y.len())));
        }
        let partials: Vec<Result<(f64, Gradients)>> = batch
            .par_chunks(GRAD_CHUNK)
            .map(|chunk| {
                let mut grads = Gradients::zeros(&self.arch);
                let mut loss = 0.0;
                for (x, y) in chunk {
                    let (pred, trace) = self.run(x)?;
                    let resid: Vec<f64> = pred.iter().zip(y.iter()).map(|(p, t)| p - t).collect();
                    loss += resid.iter().map(|r| r * r).sum::<f64>();
                    self.backward(&trace, resid.iter().map(|r| 2.0 * r).collect(), &mut grads);
                }
                Ok((loss, grads))
            })
            .collect();

        let mut total = 0.0;
        let mut grads: Option<Gradients> = None;
        for part in partials {
            let (loss, g) = part?;
            total += loss;
            match grads.as_mut() {
                Some(acc) => acc.add_assign(&g),
                None => grads = Some(g),
            }
        }
        if !total.is_finite() {
            return Err(Error::NonFinite { layer: self.arch.layers().len() });
        }
        Ok((total, grads.expect("batch is nonempty")))
    }

    /// Loss only, without gradients.
    pub fn loss(&self, batch: &[(&[f64], &[f64])]) -> Result<f64> {
        batch.iter().try_fold(0.0, |acc, (x, y)| {
            let pred = self.forward(x)?;
            if pred.len() != y.len() {
                return Err(Error::Shape(format!("target has {} samples, network produces {}", y.len(), pred.len())));
            }
            Ok(acc + pred.iter().zip(y.iter()).map(|(p, t)| (p - t).powi(2)).sum::<f64>())
        })
    }
}

fn apply_activation_grad(grad: &mut [f64], z: &[f64], act: Activation) {
    if act == Activation::Linear {
        return;
    }
    for (g, z) in grad.iter_mut().zip(z) {
        *g *= act.derivative(*z);
    }
}
