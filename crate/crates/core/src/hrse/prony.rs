use nalgebra::Complex;

use super::{fold_conjugate_pairs, take_exactly, PAIR_TOL};
use crate::error::{Error, Result};
use crate::linear_predictor::{fit_lp, LpModel};
use crate::metrics::FrequencyEstimate;
use crate::signal::SampleWindow;

/// Least-squares annihilating filter of order `2l` and its roots.
pub fn prony_roots(window: &SampleWindow, l: usize) -> Result<(LpModel, Vec<Complex<f64>>)> {
    if l == 0 {
        return Err(Error::param("l must be at least 1"));
    }
    if window.len() < 4 * l {
        return Err(Error::param(format!(
            "Prony with l = {l} needs at least {} samples, got {}",
            4 * l,
            window.len()
        )));
    }
    let fit = fit_lp(window, 2 * l)?;
    let roots = fit.model.roots();
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalDegeneracy("non-finite filter roots".into()));
    }
    Ok((fit.model, roots))
}

pub fn prony_estimate(window: &SampleWindow, l: usize) -> Result<FrequencyEstimate> {
    let (_, roots) = prony_roots(window, l)?;
    take_exactly(fold_conjugate_pairs(&roots, PAIR_TOL), l, "prony")
}
