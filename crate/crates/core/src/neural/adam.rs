use super::params::{Gradients, LayerParams, PredictorParams};

/// Adam with bias-corrected first and second moments.
#[derive(Debug, Clone)]
pub struct Adam {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    first: Vec<LayerParams>,
    second: Vec<LayerParams>,
}

impl Adam {
    pub fn new(params: &PredictorParams, learning_rate: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        let zeros: Vec<LayerParams> = params
            .layers()
            .iter()
            .map(|l| LayerParams { weights: vec![0.0; l.weights.len()], bias: vec![0.0; l.bias.len()] })
            .collect();
        Self { learning_rate, beta1, beta2, eps, step: 0, first: zeros.clone(), second: zeros }
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    /// Apply one update with gradient `grads * scale`.
    pub fn step(&mut self, params: &mut PredictorParams, grads: &Gradients, scale: f64) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let lr = self.learning_rate;
        let eps = self.eps;
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for (((p, g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                let g = g * scale;
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            }
        };
        for (((p, g), m), v) in params
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            update(&mut p.weights, &g.weights, &mut m.weights, &mut v.weights);
            update(&mut p.bias, &g.bias, &mut m.bias, &mut v.bias);
        }
    }
}
