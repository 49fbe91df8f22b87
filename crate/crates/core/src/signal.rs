//! Sinusoid-mixture synthesis, additive white Gaussian noise at a target
//! SNR, and window split/concatenation.
//!
//! Samples are indexed from `n = 1`; a window remembers its first index so a
//! predicted continuation stays phase-consistent with the observed prefix.

use std::f64::consts::TAU;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Ground-truth parameters of a sinusoid mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSpec {
    amplitudes: Vec<f64>,
    frequencies: Vec<f64>,
}

impl SinusoidSpec {
    /// Frequencies are normalized (cycles/sample) and must lie in `(0, 0.5]`.
    pub fn new(amplitudes: Vec<f64>, frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::param("a mixture needs at least one component"));
        }
        if amplitudes.len() != frequencies.len() {
            return Err(Error::param(format!(
                "{} amplitudes for {} frequencies",
                amplitudes.len(),
                frequencies.len()
            )));
        }
        if let Some(f) = frequencies.iter().find(|f| !(**f > 0.0 && **f <= 0.5)) {
            return Err(Error::param(format!("frequency {f} outside (0, 0.5]")));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::param("non-finite amplitude"));
        }
        Ok(Self { amplitudes, frequencies })
    }

    /// Unit-amplitude mixture.
    pub fn unit(frequencies: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0; frequencies.len()], frequencies)
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Number of components `L`.
    pub fn count(&self) -> usize {
        self.frequencies.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    True,
    Predicted,
    Concatenated,
}

/// A contiguous run of real samples `x(n0), ..., x(n0 + len - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWindow {
    samples: Vec<f64>,
    start_index: u64,
    provenance: Provenance,
}

impl SampleWindow {
    pub fn new(samples: Vec<f64>, start_index: u64, provenance: Provenance) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("a sample window cannot be empty"));
        }
        if start_index == 0 {
            return Err(Error::param("sample indices start at 1"));
        }
        Ok(Self { samples, start_index, provenance })
    }

    /// Observed samples starting at `n = 1`.
    pub fn observed(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, 1, Provenance::True)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    /// Index one past the last sample.
    pub fn end_index(&self) -> u64 {
        self.start_index + self.samples.len() as u64
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalModel {
    /// `sum a_l sin(2 pi f_l n)`.
    #[default]
    RealSin,
    /// `sum a_l exp(j 2 pi f_l n)`, carried as real and imaginary parts.
    ComplexExp,
}

/// Real and imaginary parts of a complex-exponential mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWindow {
    pub re: SampleWindow,
    pub im: SampleWindow,
}

/// Noiseless real sinusoid mixture for `n = 1..=n_samples`.
pub fn synthesize(spec: &SinusoidSpec, n_samples: usize) -> Result<SampleWindow> {
    synthesize_from(spec, 1, n_samples)
}

/// Noiseless real mixture for `n = start..start + n_samples`.
pub fn synthesize_from(spec: &SinusoidSpec, start: u64, n_samples: usize) -> Result<SampleWindow> {
    if n_samples == 0 {
        return Err(Error::param("n_samples must be positive"));
    }
    let samples = (0..n_samples as u64)
        .map(|k| {
            let n = (start + k) as f64;
            spec.amplitudes
                .iter()
                .zip(&spec.frequencies)
                .map(|(a, f)| a * (TAU * f * n).sin())
                .sum()
        })
        .collect();
    SampleWindow::new(samples, start, Provenance::True)
}

pub fn synthesize_complex(spec: &SinusoidSpec, n_samples: usize) -> Result<ComplexWindow> {
    if n_samples == 0 {
        return Err(Error::param("n_samples must be positive"));
    }
    let (re, im): (Vec<f64>, Vec<f64>) = (1..=n_samples as u64)
        .map(|n| {
            spec.amplitudes
                .iter()
                .zip(&spec.frequencies)
                .fold((0.0, 0.0), |(re, im), (a, f)| {
                    let phase = TAU * f * n as f64;
                    (re + a * phase.cos(), im + a * phase.sin())
                })
        })
        .unzip();
    Ok(ComplexWindow {
        re: SampleWindow::new(re, 1, Provenance::True)?,
        im: SampleWindow::new(im, 1, Provenance::True)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseLevel {
    /// `10 log10(||x||^2 / (N sigma^2))` measured on the noiseless window.
    SnrDb(f64),
    /// Standard deviation directly.
    Sigma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub level: NoiseLevel,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn snr_db(snr_db: f64, seed: u64) -> Self {
        Self { level: NoiseLevel::SnrDb(snr_db), seed }
    }

    pub fn sigma(sigma: f64, seed: u64) -> Self {
        Self { level: NoiseLevel::Sigma(sigma), seed }
    }
}

/// Noise standard deviation that puts `window` at `snr_db`.
pub fn sigma_for_snr(window: &SampleWindow, snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() {
        return Err(Error::param("SNR is NaN"));
    }
    let energy = window.energy();
    if energy == 0.0 {
        return Err(Error::DegenerateSignal(
            "cannot set an SNR on an all-zero window".into(),
        ));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    Ok((energy / (window.len() as f64 * 10f64.powf(snr_db / 10.0))).sqrt())
}

/// Add i.i.d. zero-mean Gaussian noise; returns the noisy window and the
/// standard deviation used.
pub fn add_noise(window: &SampleWindow, noise: &NoiseSpec) -> Result<(SampleWindow, f64)> {
    let sigma = match noise.level {
        NoiseLevel::SnrDb(db) => sigma_for_snr(window, db)?,
        NoiseLevel::Sigma(s) if s >= 0.0 && s.is_finite() => s,
        NoiseLevel::Sigma(s) => return Err(Error::param(format!("invalid sigma {s}"))),
    };
    if sigma == 0.0 {
        return Ok((window.clone(), 0.0));
    }
    let mut rng = rng::stream(noise.seed, &[]);
    let samples = window
        .samples
        .iter()
        .map(|x| {
            let z: f64 = StandardNormal.sample(&mut rng);
            x + sigma * z
        })
        .collect();
    Ok((
        SampleWindow::new(samples, window.start_index, window.provenance)?,
        sigma,
    ))
}

/// First `m` samples and the remainder.
pub fn split(window: &SampleWindow, m: usize) -> Result<(SampleWindow, SampleWindow)> {
    if m == 0 || m >= window.len() {
        return Err(Error::param(format!(
            "split point {m} outside 1..{}",
            window.len()
        )));
    }
    let (head, tail) = window.samples.split_at(m);
    Ok((
        SampleWindow::new(head.to_vec(), window.start_index, window.provenance)?,
        SampleWindow::new(tail.to_vec(), window.start_index + m as u64, window.provenance)?,
    ))
}

pub fn concat(a: &SampleWindow, b: &SampleWindow) -> Result<SampleWindow> {
    if b.start_index != a.end_index() {
        return Err(Error::Contiguity {
            expected_start: a.end_index(),
            actual_start: b.start_index,
        });
    }
    let provenance = if a.provenance == b.provenance {
        a.provenance
    } else {
        Provenance::Concatenated
    };
    let mut samples = Vec::with_capacity(a.len() + b.len());
    samples.extend_from_slice(&a.samples);
    samples.extend_from_slice(&b.samples);
    SampleWindow::new(samples, a.start_index, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct O(N^2) DFT magnitude at bin k of an `nfft`-point transform.
    fn dft_mag(x: &[f64], k: usize, nfft: usize) -> f64 {
        let (re, im) = x.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, v)| {
            let ph = -TAU * (k * n) as f64 / nfft as f64;
            (re + v * ph.cos(), im + v * ph.sin())
        });
        re.hypot(im)
    }

    #[test]
    fn quarter_period() {
        let spec = SinusoidSpec::unit(vec![0.25]).unwrap();
        let w = synthesize(&spec, 4).unwrap();
        for (got, want) in w.samples().iter().zip([1.0, 0.0, -1.0, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(w.start_index(), 1);
        assert_eq!(w.provenance(), Provenance::True);
    }

    #[test]
    fn two_tone_dft_peaks() {
        let spec = SinusoidSpec::unit(vec![0.1, 0.2]).unwrap();
        let w = synthesize(&spec, 150).unwrap();
        let nfft = 150;
        let mags: Vec<f64> = (0..=nfft / 2).map(|k| dft_mag(w.samples(), k, nfft)).collect();
        let mut order: Vec<usize> = (0..mags.len()).collect();
        order.sort_by(|a, b| mags[*b].total_cmp(&mags[*a]));
        let mut top = vec![order[0], order[1]];
        top.sort();
        assert_eq!(top, vec![15, 30]);
    }

    #[test]
    fn zero_amplitude_is_silent() {
        let spec = SinusoidSpec::new(vec![0.0], vec![0.3]).unwrap();
        assert!(synthesize(&spec, 10).unwrap().samples().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn invalid_specs() {
        assert!(SinusoidSpec::unit(vec![]).is_err());
        assert!(SinusoidSpec::unit(vec![0.0]).is_err());
        assert!(SinusoidSpec::unit(vec![0.51]).is_err());
        assert!(SinusoidSpec::new(vec![1.0], vec![0.1, 0.2]).is_err());
        assert!(SinusoidSpec::unit(vec![0.5]).is_ok());
    }

    #[test]
    fn complex_model_parts() {
        let spec = SinusoidSpec::unit(vec![0.25]).unwrap();
        let c = synthesize_complex(&spec, 4).unwrap();
        let re = [0.0, -1.0, 0.0, 1.0];
        let im = [1.0, 0.0, -1.0, 0.0];
        for k in 0..4 {
            assert!((c.re.samples()[k] - re[k]).abs() < 1e-12);
            assert!((c.im.samples()[k] - im[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_sigma_is_bit_exact() {
        let w = synthesize(&SinusoidSpec::unit(vec![0.13]).unwrap(), 33).unwrap();
        let (noisy, sigma) = add_noise(&w, &NoiseSpec::sigma(0.0, 9)).unwrap();
        assert_eq!(sigma, 0.0);
        assert_eq!(noisy, w);
        let (noisy, _) = add_noise(&w, &NoiseSpec::snr_db(f64::INFINITY, 9)).unwrap();
        assert_eq!(noisy, w);
    }

    #[test]
    fn empirical_snr_at_large_n() {
        let w = synthesize(&SinusoidSpec::unit(vec![0.07, 0.31]).unwrap(), 100_000).unwrap();
        let (noisy, _) = add_noise(&w, &NoiseSpec::snr_db(15.0, 1)).unwrap();
        let resid: Vec<f64> = noisy.samples().iter().zip(w.samples()).map(|(a, b)| a - b).collect();
        let mean = resid.iter().sum::<f64>() / resid.len() as f64;
        let var = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (resid.len() - 1) as f64;
        let snr = 10.0 * (w.energy() / (w.len() as f64 * var)).log10();
        assert!((snr - 15.0).abs() < 0.2, "empirical snr {snr}");
    }

    #[test]
    fn noise_is_seeded() {
        let w = synthesize(&SinusoidSpec::unit(vec![0.2]).unwrap(), 64).unwrap();
        let a = add_noise(&w, &NoiseSpec::snr_db(5.0, 77)).unwrap();
        let b = add_noise(&w, &NoiseSpec::snr_db(5.0, 77)).unwrap();
        let c = add_noise(&w, &NoiseSpec::snr_db(5.0, 78)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn snr_on_silence_is_degenerate() {
        let w = SampleWindow::observed(vec![0.0; 8]).unwrap();
        assert!(matches!(
            add_noise(&w, &NoiseSpec::snr_db(10.0, 0)),
            Err(Error::DegenerateSignal(_))
        ));
        assert!(add_noise(&w, &NoiseSpec::sigma(-1.0, 0)).is_err());
    }

    #[test]
    fn split_lengths_and_indices() {
        let w = SampleWindow::observed((0..150).map(f64::from).collect()).unwrap();
        let (a, m) = split(&w, 50).unwrap();
        assert_eq!((a.len(), m.len()), (50, 100));
        assert_eq!(m.start_index(), 51);
        let w2 = SampleWindow::observed(vec![1.0, 2.0]).unwrap();
        let (a, m) = split(&w2, 1).unwrap();
        assert_eq!((a.len(), m.len()), (1, 1));
        assert!(split(&w2, 0).is_err());
        assert!(split(&w2, 2).is_err());
    }

    #[test]
    fn concat_true_and_predicted() {
        let a = SampleWindow::new(vec![0.5; 50], 1, Provenance::True).unwrap();
        let b = SampleWindow::new(vec![0.25; 100], 51, Provenance::Predicted).unwrap();
        let c = concat(&a, &b).unwrap();
        assert_eq!(c.len(), 150);
        assert_eq!(c.provenance(), Provenance::Concatenated);
        assert_eq!(&c.samples()[..50], a.samples());
        assert_eq!(&c.samples()[50..], b.samples());

        let gap = SampleWindow::new(vec![0.0; 3], 52, Provenance::Predicted).unwrap();
        assert!(matches!(concat(&a, &gap), Err(Error::Contiguity { .. })));
        let overlap = SampleWindow::new(vec![0.0; 3], 50, Provenance::Predicted).unwrap();
        assert!(concat(&a, &overlap).is_err());
        assert!(SampleWindow::new(vec![], 1, Provenance::True).is_err());
    }

    proptest! {
        #[test]
        fn split_concat_roundtrip(xs in prop::collection::vec(-5.0f64..5.0, 2..64), frac in 0.0f64..1.0) {
            let w = SampleWindow::new(xs, 3, Provenance::True).unwrap();
            let m = 1 + ((w.len() - 1) as f64 * frac) as usize;
            let m = m.min(w.len() - 1);
            let (a, b) = split(&w, m).unwrap();
            prop_assert_eq!(concat(&a, &b).unwrap(), w);
        }

        #[test]
        fn sigma_inverts_snr(xs in prop::collection::vec(-3.0f64..3.0, 1..200), snr in -10.0f64..40.0) {
            let w = SampleWindow::observed(xs).unwrap();
            prop_assume!(w.energy() > 1e-12);
            let sigma = sigma_for_snr(&w, snr).unwrap();
            let back = 10.0 * (w.energy() / (w.len() as f64 * sigma * sigma)).log10();
            prop_assert!((back - snr).abs() < 1e-9);
        }
    }
}
