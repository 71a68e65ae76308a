use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::standardize::Standardizer;
use crate::error::{param_err, Error, Result};
use crate::seed::{self, derive_seed, stream};
use crate::synthgrid::EventClass;
use crate::tinycnn::ops::argmax_first;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SvmConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub epochs: usize,
    /// Initial step; epoch `t` (from 1) uses `step / t`.
    pub step: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 200,
            step: 1e-3,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.c) || !positive(self.step) || self.epochs == 0 {
            return Err(param_err!("SVM settings must be positive: {self:?}"));
        }
        Ok(())
    }
}

/// Four one-vs-rest linear classifiers on standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOvrSvm {
    pub standardizer: Standardizer,
    /// `[class][feature]`
    pub weights: Vec<f64>,
    pub biases: [f64; 4],
}

impl LinearOvrSvm {
    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    /// `w_c . z + b_c` of every class for standardized `z` of `x`.
    pub fn decision_values(&self, x: &[f64]) -> Result<[f64; 4]> {
        let z = self.standardizer.apply(x)?;
        Ok(self.decision_values_standardized(&z))
    }

    fn decision_values_standardized(&self, z: &[f64]) -> [f64; 4] {
        let d = self.dim();
        core::array::from_fn(|c| {
            let w = &self.weights[c * d..(c + 1) * d];
            self.biases[c] + w.iter().zip(z).map(|(w, z)| w * z).sum::<f64>()
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<EventClass> {
        let v = self.decision_values(x)?;
        Ok(EventClass::from_index(argmax_first(&v)).expect("four decision values"))
    }
}

/// Subgradient descent on `lambda/2 |w|^2 + mean hinge` per class, with
/// `lambda = 1 / (C n)`, one pass over a seeded shuffle per epoch.
pub fn train_svm_ovr(xs: &[Vec<f64>], labels: &[EventClass], cfg: &SvmConfig, seed: u64) -> Result<LinearOvrSvm> {
    cfg.validate()?;
    if xs.len() != labels.len() {
        return Err(param_err!("{} feature vectors for {} labels", xs.len(), labels.len()));
    }
    let counts = crate::synthgrid::class_counts(labels.iter().copied());
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Training(alloc::format!(
            "no examples of class {}",
            EventClass::ALL[c]
        )));
    }
    let standardizer = Standardizer::fit(xs)?;
    let zs = standardizer.apply_all(xs)?;
    let d = standardizer.dim();
    let n = zs.len();
    let lambda = 1.0 / (cfg.c * n as f64);
    let mut weights = vec![0.0; 4 * d];
    let mut biases = [0.0; 4];
    for c in 0..4 {
        let w = &mut weights[c * d..(c + 1) * d];
        let b = &mut biases[c];
        let mut rng = seed::rng(derive_seed(seed, c as u64), stream::SHUFFLE);
        let mut order: Vec<usize> = (0..n).collect();
        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut rng);
            let eta = cfg.step / epoch as f64;
            for &i in &order {
                let y = if labels[i].index() == c { 1.0 } else { -1.0 };
                let z = &zs[i];
                let margin = y * (*b + w.iter().zip(z).map(|(w, z)| w * z).sum::<f64>());
                let shrink = 1.0 - eta * lambda;
                if margin < 1.0 {
                    for (wj, zj) in w.iter_mut().zip(z) {
                        *wj = shrink * *wj + eta * y * zj;
                    }
                    *b += eta * y;
                } else {
                    w.iter_mut().for_each(|wj| *wj *= shrink);
                }
            }
        }
    }
    Ok(LinearOvrSvm {
        standardizer,
        weights,
        biases,
    })
}
