use alloc::vec;
use alloc::vec::Vec;

use super::mlp::{train_mlp, Activation, Mlp, Objective, SgdConfig};
use super::standardize::Standardizer;
use crate::error::{param_err, Error, Result};
use crate::synthgrid::EventClass;
use crate::tinycnn::ops::argmax_first;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TmlpConfig {
    /// Hidden widths; together with the input and the four outputs they must
    /// strictly decrease.
    pub hidden: Vec<usize>,
    pub sgd: SgdConfig,
}

impl Default for TmlpConfig {
    fn default() -> Self {
        TmlpConfig {
            hidden: vec![64, 16],
            sgd: SgdConfig::default(),
        }
    }
}

/// Tapered multilayer perceptron on the standardized, flattened feature
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TaperedMlp {
    pub standardizer: Standardizer,
    pub net: Mlp,
}

impl TaperedMlp {
    /// Checks the taper and builds a He-initialized network.
    pub fn init(input: usize, hidden: &[usize], seed: u64) -> Result<Mlp> {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(EventClass::COUNT);
        if widths.windows(2).any(|w| w[1] >= w[0]) {
            return Err(param_err!("t-MLP widths {widths:?} must strictly decrease"));
        }
        Mlp::init(&widths, Activation::Relu, seed)
    }

    pub fn predict(&self, x: &[f64]) -> Result<EventClass> {
        let z = self.standardizer.apply(x)?;
        let out = self.net.forward(&z)?;
        Ok(EventClass::from_index(argmax_first(&out)).expect("four outputs"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedTmlp {
    pub model: TaperedMlp,
    pub loss_trace: Vec<f64>,
}

pub fn train_tmlp(xs: &[Vec<f64>], labels: &[EventClass], cfg: &TmlpConfig, seed: u64) -> Result<TrainedTmlp> {
    if xs.len() != labels.len() || xs.is_empty() {
        return Err(Error::Training(alloc::format!(
            "{} inputs for {} labels",
            xs.len(),
            labels.len()
        )));
    }
    let standardizer = Standardizer::fit(xs)?;
    let zs = standardizer.apply_all(xs)?;
    let mut net = TaperedMlp::init(standardizer.dim(), &cfg.hidden, seed)?;
    let refs: Vec<&[f64]> = zs.iter().map(|z| z.as_slice()).collect();
    let targets: Vec<usize> = labels.iter().map(|c| c.index()).collect();
    let loss_trace = train_mlp(&mut net, &refs, &targets, Objective::Classify, &cfg.sgd, seed)?;
    Ok(TrainedTmlp {
        model: TaperedMlp { standardizer, net },
        loss_trace,
    })
}
