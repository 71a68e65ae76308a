//! Single-convolution-layer classifier: ten 2x20 filters, ReLU, 1x2 max
//! pooling, a fully connected layer and softmax, trained on cross-entropy by
//! mini-batch SGD with momentum. Double precision throughout.
//!
//! Flatten order is filter, then row, then column. Filters larger than the
//! input are clamped to it.

mod gradcheck;
mod model;
pub mod ops;
mod train;

use alloc::vec::Vec;

pub use gradcheck::{check_gradients, relative_error, GradCheckReport, ParamTensors, TensorCheck};
pub use model::{
    init_model, init_model_with_std, CnnArch, CnnModel, CnnParams, Example, ForwardCache, INIT_STD,
};
pub use train::{fit, sgdm_step, train, OptimizerState, TrainConfig, Trained};

use crate::error::Result;

/// Finite-difference check of [`CnnModel::loss_and_grad`] on `batch`.
pub fn grad_check(model: &CnnModel, batch: &[Example<'_>], h: f64) -> Result<GradCheckReport> {
    let (_, analytic) = model.loss_and_grad(batch)?;
    check_gradients(model, &analytic, h, |m: &CnnModel| m.loss_with_pattern(batch))
}

/// Predictions for many inputs.
pub fn predict_all(model: &CnnModel, xs: &[&crate::FeatureMatrix]) -> Result<Vec<crate::EventClass>> {
    xs.iter().map(|x| model.predict(x)).collect()
}
