use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::take_exactly;
use crate::error::{Error, Result};
use crate::metrics::FrequencyEstimate;
use crate::signal::SampleWindow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodogramConfig {
    /// Zero-padded transform length; at least the window length.
    pub grid_size: usize,
    /// Peaks more than this far below the strongest one are ignored, which
    /// keeps rectangular-window sidelobes (about -13 dB) out of the count.
    pub dynamic_range_db: f64,
}

impl PeriodogramConfig {
    /// Eight-fold zero padding rounded up to a power of two.
    pub fn for_len(n: usize) -> Self {
        Self { grid_size: (8 * n).next_power_of_two(), dynamic_range_db: 10.0 }
    }
}

/// Periodogram `|X(k / grid)|^2` for `k = 0..=grid / 2`.
pub(crate) fn power_spectrum(x: &[f64], grid: usize) -> Vec<f64> {
    let fft = FftPlanner::<f64>::new().plan_fft_forward(grid);
    let mut buf = vec![Complex::new(0.0, 0.0); grid];
    for (b, v) in buf.iter_mut().zip(x) {
        b.re = *v;
    }
    fft.process(&mut buf);
    buf[..=grid / 2].iter().map(|c| c.norm_sqr()).collect()
}

/// `l` strongest local maxima of the periodogram over `(0, 0.5]`, refined by
/// a parabola through each peak and its two neighbours.
pub fn periodogram_estimate(
    window: &SampleWindow,
    l: usize,
    cfg: &PeriodogramConfig,
) -> Result<FrequencyEstimate> {
    if l == 0 {
        return Err(Error::param("l must be at least 1"));
    }
    let grid = cfg.grid_size;
    if grid < window.len() || grid < 2 {
        return Err(Error::param(format!(
            "grid size {grid} smaller than window length {}",
            window.len()
        )));
    }
    let half = power_spectrum(window.samples(), grid);
    // Real input: |X(k)| = |X(grid - k)|.
    let p = |k: usize| half[k.min(grid - k)];

    let mut peaks: Vec<(usize, f64)> = (1..=grid / 2)
        .filter(|&k| p(k) > p(k - 1) && p(k) >= p(k + 1))
        .map(|k| (k, p(k)))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    if let Some(&(_, top)) = peaks.first() {
        let floor = top * 10f64.powf(-cfg.dynamic_range_db / 10.0);
        peaks.retain(|(_, v)| *v >= floor);
    }

    let freqs = peaks
        .iter()
        .take(l)
        .map(|&(k, _)| {
            let (a, b, c) = (p(k - 1).sqrt(), p(k).sqrt(), p(k + 1).sqrt());
            let denom = a - 2.0 * b + c;
            let delta = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            ((k as f64 + delta.clamp(-0.5, 0.5)) / grid as f64).clamp(f64::MIN_POSITIVE, 0.5)
        })
        .collect();
    take_exactly(freqs, l, "periodogram")
}
