//! Predict-then-estimate frequency super-resolution.
//!
//! Given the first `M` samples of a noisy real sinusoid mixture, a trainable
//! extrapolator predicts samples `M + 1 ..= N`, and a subspace estimator
//! (ESPRIT by default) runs on the concatenated length-`N` sequence. The
//! crate also carries the classical baselines, training-data recipes and a
//! Monte Carlo benchmark harness.

pub mod datagen;
pub mod error;
pub mod experiments;
pub mod neural;
pub mod hrse;
mod linalg;
pub mod linear_predictor;
pub mod metrics;
mod poly;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
