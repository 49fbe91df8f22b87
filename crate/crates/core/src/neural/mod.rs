//! Trainable extrapolator `G: R^M -> R^(N-M)`: a small 1-D CNN with a dense
//! linear head, trained with Adam on summed squared prediction error.

mod adam;
mod arch;
mod io;
mod network;
mod params;
mod train;

pub use adam::Adam;
pub use arch::{Activation, ArchitectureSpec, InputNorm, LayerSpec, Shape};
pub use io::{decode_params, encode_params, load_params, load_params_for, save_params, WEIGHTS_FORMAT_VERSION};
pub use params::{Gradients, LayerParams, PredictorParams};
pub use train::{train, train_with, Diverged, TrainConfig, TrainError, Trained};

use crate::error::{Error, Result};
use crate::signal::{Provenance, SampleWindow};

/// Predict the `N - M` samples that follow `x_a`.
pub fn predict_window(params: &PredictorParams, x_a: &SampleWindow) -> Result<SampleWindow> {
    let m = params.architecture().input_len();
    if x_a.len() != m {
        return Err(Error::Shape(format!("predictor expects {m} samples, got {}", x_a.len())));
    }
    let y = params.forward(x_a.samples())?;
    SampleWindow::new(y, x_a.end_index(), Provenance::Predicted)
}
