//! Frequency-set matching and the normalized mean-squared frequency error.
//!
//! Trial NMSEs are averaged on the linear scale and converted to dB once;
//! per-trial dB values are never averaged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted frequency estimate produced by one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub frequencies: Vec<f64>,
    pub method_tag: String,
}

impl FrequencyEstimate {
    pub fn new(mut frequencies: Vec<f64>, method_tag: impl Into<String>) -> Self {
        frequencies.sort_by(f64::total_cmp);
        Self { frequencies, method_tag: method_tag.into() }
    }
}

/// Pair truth and estimate by sorting both and zipping.
pub fn match_frequencies(truth: &[f64], estimate: &[f64]) -> Result<Vec<(f64, f64)>> {
    if truth.len() != estimate.len() || truth.is_empty() {
        return Err(Error::Cardinality { truth: truth.len(), estimate: estimate.len() });
    }
    let mut t = truth.to_vec();
    let mut e = estimate.to_vec();
    t.sort_by(f64::total_cmp);
    e.sort_by(f64::total_cmp);
    Ok(t.into_iter().zip(e).collect())
}

/// Linear NMSE: `sum (f_k - f~_k)^2 / sum f_k^2` over matched pairs.
pub fn nmse(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    let pairs = match_frequencies(truth, estimate)?;
    let power: f64 = pairs.iter().map(|(f, _)| f * f).sum();
    if power == 0.0 {
        return Err(Error::DegenerateMetric("true frequencies are all zero".into()));
    }
    let err: f64 = pairs.iter().map(|(f, g)| (f - g) * (f - g)).sum();
    Ok(err / power)
}

/// `10 log10(mean(values))`. A zero mean yields `f64::NEG_INFINITY`.
pub fn nmse_db(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::DegenerateMetric("no NMSE values to aggregate".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::DegenerateMetric(format!("invalid NMSE value {v}")));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(if mean == 0.0 { f64::NEG_INFINITY } else { 10.0 * mean.log10() })
}
