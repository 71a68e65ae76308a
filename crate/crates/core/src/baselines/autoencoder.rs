use alloc::vec::Vec;

use super::mlp::{train_mlp, Activation, Mlp, Objective, SgdConfig};
use super::standardize::Standardizer;
use crate::error::{param_err, Error, Result};
use crate::seed::derive_seed;
use crate::synthgrid::EventClass;
use crate::tinycnn::ops::argmax_first;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AutoencoderConfig {
    pub code_width: usize,
    /// Reconstruction stage.
    pub pretrain: SgdConfig,
    /// Softmax head on the frozen code.
    pub head: SgdConfig,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            code_width: 32,
            pretrain: SgdConfig::default(),
            head: SgdConfig::default(),
        }
    }
}

/// Linear encoder and decoder with a softmax head on the code.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderClassifier {
    pub standardizer: Standardizer,
    /// `[encoder, decoder]`, no hidden activation.
    pub autoencoder: Mlp,
    pub head: Mlp,
}

impl AutoencoderClassifier {
    pub fn encode(&self, z: &[f64]) -> Result<Vec<f64>> {
        let enc = Mlp {
            layers: alloc::vec![self.autoencoder.layers[0].clone()],
            hidden: Activation::Identity,
        };
        enc.forward(z)
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.standardizer.apply(x)?;
        self.autoencoder.forward(&z)
    }

    pub fn predict(&self, x: &[f64]) -> Result<EventClass> {
        let z = self.standardizer.apply(x)?;
        let out = self.head.forward(&self.encode(&z)?)?;
        Ok(EventClass::from_index(argmax_first(&out)).expect("four outputs"))
    }

    pub fn check_shapes(&self) -> Result<()> {
        self.autoencoder.check_shapes()?;
        self.head.check_shapes()?;
        let d = self.standardizer.dim();
        if self.autoencoder.layers.len() != 2
            || self.autoencoder.input_dim() != d
            || self.autoencoder.output_dim() != d
            || self.head.input_dim() != self.autoencoder.layers[0].outputs
            || self.head.output_dim() != EventClass::COUNT
        {
            return Err(param_err!("autoencoder layers do not line up"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedAutoencoder {
    pub model: AutoencoderClassifier,
    /// Mean squared reconstruction error per pretraining epoch.
    pub reconstruction_trace: Vec<f64>,
    pub head_trace: Vec<f64>,
}

/// Stage 1 minimizes reconstruction error; stage 2 fits the head with the
/// encoder frozen.
pub fn train_autoencoder_clf(
    xs: &[Vec<f64>],
    labels: &[EventClass],
    cfg: &AutoencoderConfig,
    seed: u64,
) -> Result<TrainedAutoencoder> {
    if xs.len() != labels.len() || xs.is_empty() {
        return Err(Error::Training(alloc::format!(
            "{} inputs for {} labels",
            xs.len(),
            labels.len()
        )));
    }
    if cfg.code_width == 0 {
        return Err(param_err!("code width must be positive"));
    }
    let standardizer = Standardizer::fit(xs)?;
    let zs = standardizer.apply_all(xs)?;
    let d = standardizer.dim();
    let refs: Vec<&[f64]> = zs.iter().map(|z| z.as_slice()).collect();

    let mut autoencoder = Mlp::init(&[d, cfg.code_width, d], Activation::Identity, derive_seed(seed, 0))?;
    let reconstruction_trace = train_mlp(&mut autoencoder, &refs, &[], Objective::Reconstruct, &cfg.pretrain, seed)?;

    let mut model = AutoencoderClassifier {
        standardizer,
        autoencoder,
        head: Mlp::init(&[cfg.code_width, EventClass::COUNT], Activation::Identity, derive_seed(seed, 1))?,
    };
    let codes = zs.iter().map(|z| model.encode(z)).collect::<Result<Vec<_>>>()?;
    let code_refs: Vec<&[f64]> = codes.iter().map(|c| c.as_slice()).collect();
    let targets: Vec<usize> = labels.iter().map(|c| c.index()).collect();
    let head_trace = train_mlp(
        &mut model.head,
        &code_refs,
        &targets,
        Objective::Classify,
        &cfg.head,
        derive_seed(seed, 2),
    )?;
    Ok(TrainedAutoencoder {
        model,
        reconstruction_trace,
        head_trace,
    })
}
