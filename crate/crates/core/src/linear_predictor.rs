//! Least-squares linear prediction and recursive extrapolation.
//!
//! A noiseless mixture of `L` real sinusoids obeys an exact order-`2L`
//! recurrence `x(n) = sum_k c_k x(n - k)`; with noise the coefficients are
//! fit by least squares over every `n` in `[order + 1, len]`.

use std::f64::consts::TAU;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly;
use crate::signal::{Provenance, SampleWindow};

/// Prediction coefficients `c_1 .. c_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    coeffs: Vec<f64>,
}

impl LpModel {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("prediction order must be at least 1"));
        }
        Ok(Self { coeffs })
    }

    /// Exact recurrence for real sinusoids at `frequencies`: the coefficients
    /// of `prod_l (z^2 - 2 cos(2 pi f_l) z + 1)`.
    pub fn analytic(frequencies: &[f64]) -> Result<Self> {
        let roots: Vec<Complex<f64>> = frequencies
            .iter()
            .flat_map(|f| {
                let z = Complex::from_polar(1.0, TAU * f);
                [z, z.conj()]
            })
            .collect();
        Self::new(poly::from_roots(&roots).into_iter().map(|a| -a).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Roots of the characteristic polynomial `z^K - c_1 z^(K-1) - .. - c_K`.
    pub fn roots(&self) -> Vec<Complex<f64>> {
        let tail: Vec<f64> = self.coeffs.iter().map(|c| -c).collect();
        poly::roots(&tail)
    }

    /// Same model with every nonzero root projected onto the unit circle.
    pub fn stabilized(&self) -> Result<Self> {
        let projected: Vec<Complex<f64>> = self
            .roots()
            .into_iter()
            .map(|z| if z.norm() > 0.0 { z / z.norm() } else { z })
            .collect();
        Self::new(poly::from_roots(&projected).into_iter().map(|a| -a).collect())
    }

    /// One-step prediction from the `order` most recent samples, newest last.
    fn predict_next(&self, history: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(history.iter().rev())
            .map(|(c, x)| c * x)
            .sum()
    }
}

/// A fitted model plus its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFit {
    pub model: LpModel,
    /// Sum of squared one-step prediction errors over the fit range.
    pub residual: f64,
    pub rank: usize,
}

/// Fit order-`order` prediction coefficients by least squares.
pub fn fit_lp(window: &SampleWindow, order: usize) -> Result<LpFit> {
    if order == 0 {
        return Err(Error::param("prediction order must be at least 1"));
    }
    let x = window.samples();
    if x.len() < 2 * order {
        return Err(Error::param(format!(
            "window of {} samples is too short for order {order} (needs {})",
            x.len(),
            2 * order
        )));
    }
    let rows = x.len() - order;
    let a = DMatrix::from_fn(rows, order, |r, k| x[r + order - 1 - k]);
    let b = DVector::from_fn(rows, |r, _| x[r + order]);

    let svd = linalg::svd(&a)?;
    let smax = svd.s[0];
    let tol = smax * rows.max(order) as f64 * f64::EPSILON;
    let rank = svd.rank(tol);
    if smax == 0.0 || rank < order {
        return Err(Error::NumericalDegeneracy(format!(
            "prediction matrix has rank {rank} below order {order}"
        )));
    }
    let c = DVector::from_column_slice(svd.solve(&DMatrix::from_column_slice(rows, 1, b.as_slice()), tol).as_slice());
    let residual = (&a * &c - &b).norm_squared();
    Ok(LpFit {
        model: LpModel::new(c.iter().copied().collect())?,
        residual,
        rank,
    })
}

/// Run the recurrence forward `horizon` steps past the end of `window`.
pub fn extrapolate(model: &LpModel, window: &SampleWindow, horizon: usize) -> Result<SampleWindow> {
    if horizon == 0 {
        return Err(Error::param("horizon must be positive"));
    }
    let order = model.order();
    if window.len() < order {
        return Err(Error::param(format!(
            "window of {} samples cannot seed an order-{order} recursion",
            window.len()
        )));
    }
    let mut history = window.samples()[window.len() - order..].to_vec();
    history.reserve(horizon);
    for _ in 0..horizon {
        let next = model.predict_next(&history[history.len() - order..]);
        history.push(next);
    }
    SampleWindow::new(history.split_off(order), window.end_index(), Provenance::Predicted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{add_noise, synthesize, synthesize_from, NoiseSpec, SinusoidSpec};
    use proptest::prelude::*;

    #[test]
    fn single_tone_coefficients() {
        let w = synthesize(&SinusoidSpec::unit(vec![0.2]).unwrap(), 40).unwrap();
        let fit = fit_lp(&w, 2).unwrap();
        let want = [2.0 * (TAU * 0.2).cos(), -1.0];
        for (c, e) in fit.model.coeffs().iter().zip(want) {
            assert!((c - e).abs() < 1e-9, "{c} vs {e}");
        }
    }

    #[test]
    fn two_tone_perfectly_predictable() {
        let w = synthesize(&SinusoidSpec::unit(vec![0.11, 0.27]).unwrap(), 50).unwrap();
        let fit = fit_lp(&w, 4).unwrap();
        assert!(fit.residual < 1e-9, "residual {}", fit.residual);
        assert_eq!(fit.rank, 4);
    }

    #[test]
    fn silence_is_degenerate() {
        let w = SampleWindow::observed(vec![0.0; 20]).unwrap();
        assert!(matches!(fit_lp(&w, 2), Err(Error::NumericalDegeneracy(_))));
    }

    #[test]
    fn short_window_rejected() {
        let w = SampleWindow::observed(vec![1.0; 7]).unwrap();
        assert!(matches!(fit_lp(&w, 4), Err(Error::Parameter(_))));
        assert!(fit_lp(&w, 0).is_err());
    }

    #[test]
    fn extrapolation_matches_synthesis() {
        let spec = SinusoidSpec::unit(vec![0.08, 0.31]).unwrap();
        let w = synthesize(&spec, 50).unwrap();
        let fit = fit_lp(&w, 4).unwrap();
        let ext = extrapolate(&fit.model, &w, 100).unwrap();
        assert_eq!(ext.start_index(), 51);
        assert_eq!(ext.provenance(), Provenance::Predicted);
        let truth = synthesize_from(&spec, 51, 100).unwrap();
        let err = ext
            .samples()
            .iter()
            .zip(truth.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "max error {err}");
        assert!(extrapolate(&fit.model, &w, 0).is_err());
    }

    #[test]
    fn error_grows_with_horizon_at_low_snr() {
        let spec = SinusoidSpec::unit(vec![0.12, 0.2]).unwrap();
        let clean = synthesize(&spec, 50).unwrap();
        let truth = synthesize_from(&spec, 51, 100).unwrap();
        let mut early = 0.0;
        let mut late = 0.0;
        for seed in 0..20 {
            let (noisy, _) = add_noise(&clean, &NoiseSpec::snr_db(5.0, seed)).unwrap();
            let fit = fit_lp(&noisy, 4).unwrap();
            let ext = extrapolate(&fit.model, &noisy, 100).unwrap();
            let e: Vec<f64> = ext.samples().iter().zip(truth.samples()).map(|(a, b)| (a - b).powi(2)).collect();
            early += e[..20].iter().sum::<f64>();
            late += e[80..].iter().sum::<f64>();
        }
        assert!(late > early, "late {late} early {early}");
    }

    #[test]
    fn analytic_recurrence_holds_for_synthesis() {
        let freqs = [0.05, 0.19, 0.33, 0.41];
        let w = synthesize(&SinusoidSpec::unit(freqs.to_vec()).unwrap(), 120).unwrap();
        let model = LpModel::analytic(&freqs).unwrap();
        assert_eq!(model.order(), 8);
        let x = w.samples();
        for n in 8..x.len() {
            let pred = model.predict_next(&x[n - 8..n]);
            assert!((pred - x[n]).abs() < 1e-9);
        }
    }

    #[test]
    fn stabilization_preserves_unit_circle_models() {
        let model = LpModel::analytic(&[0.1, 0.3]).unwrap();
        let s = model.stabilized().unwrap();
        for (a, b) in model.coeffs().iter().zip(s.coeffs()) {
            assert!((a - b).abs() < 1e-9);
        }
        let damped = LpModel::new(vec![2.0 * 0.9 * (TAU * 0.1).cos(), -0.81]).unwrap();
        for z in damped.stabilized().unwrap().roots() {
            assert!((z.norm() - 1.0).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn noiseless_fidelity_over_long_horizon(
            l in 1usize..=4,
            seed in any::<u64>(),
        ) {
            use rand::Rng;
            let mut rng = crate::rng::stream(seed, &[]);
            let n = 12 * l;
            let sep = 2.0 / n as f64;
            // Rejection-sample well separated frequencies away from 0 and 0.5.
            let freqs = loop {
                let mut f: Vec<f64> = (0..l).map(|_| rng.random_range(sep..0.5 - sep)).collect();
                f.sort_by(f64::total_cmp);
                if f.windows(2).all(|p| p[1] - p[0] >= sep) {
                    break f;
                }
            };
            let spec = SinusoidSpec::unit(freqs).unwrap();
            let w = synthesize(&spec, n).unwrap();
            let fit = fit_lp(&w, 2 * l).unwrap();
            let ext = extrapolate(&fit.model, &w, 2 * n).unwrap();
            let truth = synthesize_from(&spec, n as u64 + 1, 2 * n).unwrap();
            for (a, b) in ext.samples().iter().zip(truth.samples()) {
                prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
            }
        }

        #[test]
        fn residual_non_increasing_in_order(seed in any::<u64>()) {
            let spec = SinusoidSpec::unit(vec![0.1, 0.23]).unwrap();
            let clean = synthesize(&spec, 60).unwrap();
            let (noisy, _) = add_noise(&clean, &NoiseSpec::snr_db(10.0, seed)).unwrap();
            let res: Vec<f64> = (1..=8).map(|p| fit_lp(&noisy, p).unwrap().residual).collect();
            // Order p+1 fits a subset of order p's rows with a superset of its models.
            for pair in res.windows(2) {
                prop_assert!(pair[1] <= pair[0] * (1.0 + 1e-9) + 1e-12, "{:?}", res);
            }
        }
    }
}
