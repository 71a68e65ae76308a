use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::gradcheck::ParamTensors;
use super::model::{init_model_with_std, CnnArch, CnnModel, CnnParams, Example};
use super::ops::sgdm_update;
use crate::error::{param_err, Error, Result};
use crate::seed::{self, stream};

/// Mini-batch SGD with momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub init_std: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 8,
            learning_rate: 1e-4,
            momentum: 0.9,
            init_std: 0.01,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(param_err!("epochs and batch size must be positive"));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.learning_rate) || !positive(self.momentum) || !positive(self.init_std) {
            return Err(param_err!(
                "learning rate, momentum and init std must be positive: {self:?}"
            ));
        }
        if self.momentum >= 1.0 {
            return Err(param_err!("momentum {} must be below 1", self.momentum));
        }
        Ok(())
    }
}

/// Velocity buffers, zero at the start.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub velocity: CnnParams,
}

impl OptimizerState {
    pub fn new(arch: &CnnArch) -> Self {
        OptimizerState {
            velocity: CnnParams::zeros(arch),
        }
    }
}

/// One momentum step over every tensor.
pub fn sgdm_step(model: &mut CnnModel, grads: &CnnParams, state: &mut OptimizerState, cfg: &TrainConfig) -> Result<()> {
    if !grads.shapes_match(&model.arch) || !state.velocity.shapes_match(&model.arch) {
        return Err(param_err!("gradient or velocity shapes do not match the model"));
    }
    for t in 0..4 {
        sgdm_update(
            model.params.tensor_mut(t),
            state.velocity.tensor_mut(t),
            grads.tensor(t),
            cfg.learning_rate,
            cfg.momentum,
        );
    }
    Ok(())
}

/// Result of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: CnnModel,
    /// Mean training loss of each epoch, accumulated over its batches.
    pub loss_trace: Vec<f64>,
}

/// `cfg.epochs` passes over `data`, reshuffled every epoch with the seeded
/// generator and cut into batches of `cfg.batch_size` (the last one may be
/// short).
pub fn train(mut model: CnnModel, data: &[Example<'_>], cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    model.check_shapes()?;
    if data.is_empty() {
        return Err(param_err!("empty training set"));
    }
    for (x, _) in data {
        model.check_input(x)?;
    }
    let mut state = OptimizerState::new(&model.arch);
    let mut rng = seed::rng(cfg.seed, stream::SHUFFLE);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i]));
            let (loss, grads) = model.loss_and_grad(&batch)?;
            epoch_loss += loss * chunk.len() as f64;
            sgdm_step(&mut model, &grads, &mut state, cfg)?;
        }
        let epoch_loss = epoch_loss / data.len() as f64;
        if !epoch_loss.is_finite() || !model.params.is_finite() {
            return Err(Error::Training(alloc::format!(
                "loss diverged after {} epochs",
                loss_trace.len() + 1
            )));
        }
        loss_trace.push(epoch_loss);
    }
    Ok(Trained { model, loss_trace })
}

/// Initializes a model for `arch` from `cfg.seed` and trains it.
pub fn fit(arch: CnnArch, data: &[Example<'_>], cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    let model = init_model_with_std(arch, cfg.seed, cfg.init_std)?;
    train(model, data, cfg)
}
