use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::{fold_conjugate_pairs, take_exactly, PAIR_TOL};
use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics::FrequencyEstimate;
use crate::signal::SampleWindow;

/// Hankel data-matrix layout: `rows` x `(n - rows + 1)` with
/// `H[i][j] = x[i + j]`, and the signal-subspace dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HankelConfig {
    pub rows: usize,
    pub model_order: usize,
}

impl HankelConfig {
    /// Near-square default: `rows = n / 2` clamped to `[order + 1, n - order]`.
    pub fn default_for(n: usize, l: usize) -> Result<Self> {
        let order = 2 * l;
        if l == 0 {
            return Err(Error::param("l must be at least 1"));
        }
        if n < 2 * order + 1 {
            return Err(Error::Config(format!(
                "{n} samples cannot support a {order}-dimensional signal subspace (need {})",
                2 * order + 1
            )));
        }
        let rows = (n / 2).clamp(order + 1, n - order);
        Ok(Self { rows, model_order: order })
    }

    fn validate(&self, n: usize) -> Result<()> {
        let cols = (n + 1).checked_sub(self.rows).unwrap_or(0);
        if self.model_order == 0
            || self.rows < self.model_order + 1
            || cols < self.model_order
        {
            return Err(Error::Config(format!(
                "Hankel {}x{} cannot hold a {}-dimensional signal subspace",
                self.rows, cols, self.model_order
            )));
        }
        Ok(())
    }
}

/// Raw rotation-operator eigenvalues for `l` real sinusoids (`2l` values).
pub fn esprit_eigenvalues(
    window: &SampleWindow,
    l: usize,
    cfg: Option<HankelConfig>,
) -> Result<Vec<Complex<f64>>> {
    let x = window.samples();
    let n = x.len();
    let cfg = match cfg {
        Some(c) => c,
        None => HankelConfig::default_for(n, l)?,
    };
    cfg.validate(n)?;
    let (w, order) = (cfg.rows, cfg.model_order);
    let hankel = DMatrix::from_fn(w, n - w + 1, |i, j| x[i + j]);

    let svd = linalg::svd(&hankel)?;
    if svd.s[0] == 0.0 {
        return Err(Error::NumericalDegeneracy("all-zero window".into()));
    }
    // Signal subspace: left singular vectors of the `order` largest values.
    let signal = svd.u.columns(0, order).into_owned();

    let upper = signal.rows(0, w - 1).into_owned();
    let lower = signal.rows(1, w - 1).into_owned();
    let rotation = linalg::svd(&upper)?.solve(&lower, f64::EPSILON);
    Ok(rotation.complex_eigenvalues().iter().copied().collect())
}

/// ESPRIT frequency estimate for `l` real sinusoids.
pub fn esprit_estimate(
    window: &SampleWindow,
    l: usize,
    cfg: Option<HankelConfig>,
) -> Result<FrequencyEstimate> {
    let eig = esprit_eigenvalues(window, l, cfg)?;
    take_exactly(fold_conjugate_pairs(&eig, PAIR_TOL), l, "esprit")
}
