//! Classical line-spectrum estimators for real sinusoid mixtures:
//! periodogram peak picking, Prony (annihilating filter) and ESPRIT.
//!
//! Prony and ESPRIT model `L` real sinusoids as `2L` complex exponentials.
//! Their eigenvalues/roots come in conjugate pairs; each pair folds into one
//! frequency `|arg z| / 2 pi` in `(0, 0.5]`.

mod esprit;
mod periodogram;
mod prony;

use std::f64::consts::TAU;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::FrequencyEstimate;
use crate::signal::SampleWindow;

pub use esprit::{esprit_eigenvalues, esprit_estimate, HankelConfig};
pub use periodogram::{periodogram_estimate, PeriodogramConfig};
pub use prony::{prony_estimate, prony_roots};

/// Angular tolerance for conjugate pairing of noisy eigenvalues.
pub const PAIR_TOL: f64 = 1e-2 * TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    #[default]
    Esprit,
    Prony,
    Periodogram,
}

impl Estimator {
    pub fn tag(self) -> &'static str {
        match self {
            Estimator::Esprit => "esprit",
            Estimator::Prony => "prony",
            Estimator::Periodogram => "periodogram",
        }
    }

    /// Run this estimator with its default configuration.
    pub fn estimate(self, window: &SampleWindow, l: usize) -> Result<FrequencyEstimate> {
        match self {
            Estimator::Esprit => esprit_estimate(window, l, None),
            Estimator::Prony => prony_estimate(window, l),
            Estimator::Periodogram => {
                periodogram_estimate(window, l, &PeriodogramConfig::for_len(window.len()))
            }
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "esprit" => Ok(Estimator::Esprit),
            "prony" => Ok(Estimator::Prony),
            "periodogram" => Ok(Estimator::Periodogram),
            other => Err(Error::param(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Fold conjugate eigenvalue pairs into frequencies.
///
/// Each eigenvalue with positive angle is greedily matched to the unused
/// negative-angle eigenvalue whose angle is closest to its mirror image.
/// Real eigenvalues have no partner and contribute nothing. Returns the
/// frequencies ascending.
pub(crate) fn fold_conjugate_pairs(values: &[Complex<f64>], tol: f64) -> Vec<f64> {
    let mut positive: Vec<f64> = values.iter().filter(|z| z.im > 0.0).map(|z| z.arg()).collect();
    let mut negative: Vec<Option<f64>> =
        values.iter().filter(|z| z.im < 0.0).map(|z| Some(z.arg())).collect();
    positive.sort_by(f64::total_cmp);

    let mut freqs = Vec::with_capacity(positive.len());
    for theta in positive {
        let best = negative
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.map(|phi| (i, (theta + phi).abs())))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, gap)) = best {
            if gap <= tol {
                let phi = negative[i].take().unwrap();
                let angle = 0.5 * (theta - phi);
                freqs.push((angle / TAU).min(0.5));
            }
        }
    }
    freqs.sort_by(f64::total_cmp);
    freqs
}

/// Pick exactly `l` frequencies from folded pairs, or report under-resolution.
pub(crate) fn take_exactly(freqs: Vec<f64>, l: usize, tag: &str) -> Result<FrequencyEstimate> {
    if freqs.len() < l {
        return Err(Error::UnderResolution { requested: l, resolved: freqs.len() });
    }
    debug_assert!(freqs.iter().all(|f| *f > 0.0 && *f <= 0.5 + 1e-15));
    Ok(FrequencyEstimate::new(freqs.into_iter().take(l).collect(), tag))
}
