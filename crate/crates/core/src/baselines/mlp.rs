//! Fully connected networks trained with the same mini-batch SGD-momentum
//! loop as the CNN.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::error::{param_err, Error, Result};
use crate::seed::{self, stream};
use crate::tinycnn::ops::{cross_entropy, sgdm_update, softmax};
use crate::tinycnn::ParamTensors;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

/// Affine layer, weights `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.biases[o] + w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect()
    }
}

/// Stack of dense layers; `hidden` follows every layer but the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub hidden: Activation,
}

/// Training target of [`Mlp::loss_and_grad`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Softmax cross-entropy against a class index.
    Classify,
    /// Mean squared error against the input itself.
    Reconstruct,
}

impl Mlp {
    /// He-normal weights for `widths[0] -> widths[1] -> ...`, zero biases.
    pub fn init(widths: &[usize], hidden: Activation, seed: u64) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(param_err!("layer widths {widths:?} need at least two positive entries"));
        }
        let mut rng = seed::rng(seed, stream::INIT);
        let layers = widths
            .windows(2)
            .map(|w| {
                let mut layer = Dense::zeros(w[0], w[1]);
                let normal = Normal::new(0.0, sqrt(2.0 / w[0] as f64)).expect("positive std");
                layer.weights.iter_mut().for_each(|v| *v = normal.sample(&mut rng));
                layer
            })
            .collect();
        Ok(Mlp { layers, hidden })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim()];
        w.extend(self.layers.iter().map(|l| l.outputs));
        w
    }

    pub fn check_shapes(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(param_err!("network has no layers"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(param_err!("layer {i} tensors do not match {}x{}", l.outputs, l.inputs));
            }
            if i > 0 && self.layers[i - 1].outputs != l.inputs {
                return Err(param_err!("layer {i} input width does not match the previous layer"));
            }
        }
        Ok(())
    }

    fn zeros_like(&self) -> Mlp {
        Mlp {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
            hidden: self.hidden,
        }
    }

    /// Layer outputs after activation; `acts[0]` is the input.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.apply(&acts[i]);
            if i < last && self.hidden == Activation::Relu {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(param_err!("{} inputs, network expects {}", x.len(), self.input_dim()));
        }
        Ok(self.activations(x).pop().expect("at least one layer"))
    }

    /// Accumulates `dLoss/dparams` given `dout = dLoss/d(output)`.
    fn backward(&self, acts: &[Vec<f64>], mut dout: Vec<f64>, grads: &mut Mlp) {
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let g = &mut grads.layers[i];
            let input = &acts[i];
            let mut din = vec![0.0; layer.inputs];
            for (o, &d) in dout.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.biases[o] += d;
                let row = o * layer.inputs;
                for j in 0..layer.inputs {
                    g.weights[row + j] += d * input[j];
                    din[j] += d * layer.weights[row + j];
                }
            }
            if i > 0 && self.hidden == Activation::Relu {
                for (d, &a) in din.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            dout = din;
        }
    }

    fn example_loss(&self, out: &[f64], x: &[f64], target: usize, objective: Objective) -> (f64, Vec<f64>) {
        match objective {
            Objective::Classify => {
                let p = softmax(out);
                let d = p
                    .iter()
                    .enumerate()
                    .map(|(k, &pk)| pk - if k == target { 1.0 } else { 0.0 })
                    .collect();
                (cross_entropy(out, target), d)
            }
            Objective::Reconstruct => {
                let n = out.len() as f64;
                let loss = out.iter().zip(x).map(|(y, x)| (y - x) * (y - x)).sum::<f64>() / n;
                let d = out.iter().zip(x).map(|(y, x)| 2.0 * (y - x) / n).collect();
                (loss, d)
            }
        }
    }

    fn check_batch(&self, xs: &[&[f64]], targets: &[usize], objective: Objective) -> Result<()> {
        if xs.is_empty() {
            return Err(param_err!("empty batch"));
        }
        if xs.iter().any(|x| x.len() != self.input_dim()) {
            return Err(param_err!("input width differs from {}", self.input_dim()));
        }
        match objective {
            Objective::Classify => {
                if targets.len() != xs.len() || targets.iter().any(|&t| t >= self.output_dim()) {
                    return Err(param_err!("class targets missing or out of range"));
                }
            }
            Objective::Reconstruct => {
                if self.output_dim() != self.input_dim() {
                    return Err(param_err!("reconstruction needs output width = input width"));
                }
            }
        }
        Ok(())
    }

    /// Batch-mean loss and gradient. `targets` is ignored for
    /// [`Objective::Reconstruct`].
    pub fn loss_and_grad(&self, xs: &[&[f64]], targets: &[usize], objective: Objective) -> Result<(f64, Mlp)> {
        self.check_batch(xs, targets, objective)?;
        let mut grads = self.zeros_like();
        let mut loss = 0.0;
        for (i, x) in xs.iter().enumerate() {
            let acts = self.activations(x);
            let target = targets.get(i).copied().unwrap_or(0);
            let (l, dout) = self.example_loss(&acts[acts.len() - 1], x, target, objective);
            loss += l;
            self.backward(&acts, dout, &mut grads);
        }
        let inv = 1.0 / xs.len() as f64;
        for t in 0..grads.tensor_count() {
            grads.tensor_mut(t).iter_mut().for_each(|v| *v *= inv);
        }
        Ok((loss * inv, grads))
    }

    /// Batch-mean loss and the ReLU sign pattern of every hidden unit.
    pub fn loss_with_pattern(&self, xs: &[&[f64]], targets: &[usize], objective: Objective) -> Result<(f64, Vec<bool>)> {
        self.check_batch(xs, targets, objective)?;
        let mut loss = 0.0;
        let mut pattern = Vec::new();
        let last = self.layers.len() - 1;
        for (i, x) in xs.iter().enumerate() {
            let mut a = x.to_vec();
            for (l, layer) in self.layers.iter().enumerate() {
                a = layer.apply(&a);
                if l < last && self.hidden == Activation::Relu {
                    pattern.extend(a.iter().map(|&v| v > 0.0));
                    a.iter_mut().for_each(|v| *v = v.max(0.0));
                }
            }
            let target = targets.get(i).copied().unwrap_or(0);
            loss += self.example_loss(&a, x, target, objective).0;
        }
        Ok((loss / xs.len() as f64, pattern))
    }
}

impl ParamTensors for Mlp {
    fn tensor_count(&self) -> usize {
        2 * self.layers.len()
    }

    fn tensor_name(&self, i: usize) -> String {
        let kind = if i.is_multiple_of(2) { "weights" } else { "biases" };
        format!("layer{}_{kind}", i / 2)
    }

    fn tensor(&self, i: usize) -> &[f64] {
        let l = &self.layers[i / 2];
        if i.is_multiple_of(2) {
            &l.weights
        } else {
            &l.biases
        }
    }

    fn tensor_mut(&mut self, i: usize) -> &mut [f64] {
        let l = &mut self.layers[i / 2];
        if i.is_multiple_of(2) {
            &mut l.weights
        } else {
            &mut l.biases
        }
    }
}

/// Mini-batch SGD with momentum for the baseline networks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SgdConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            epochs: 50,
            batch_size: 8,
            learning_rate: 1e-3,
            momentum: 0.9,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(param_err!("epochs and batch size must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(param_err!("learning rate {} must be positive", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(param_err!("momentum {} must lie in [0, 1)", self.momentum));
        }
        Ok(())
    }
}

/// Trains `net` in place; returns the mean loss of each epoch. `seed` drives
/// the per-epoch shuffles.
pub fn train_mlp(
    net: &mut Mlp,
    xs: &[&[f64]],
    targets: &[usize],
    objective: Objective,
    cfg: &SgdConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    net.check_shapes()?;
    net.check_batch(xs, targets, objective)?;
    let mut velocity = net.zeros_like();
    let mut rng = seed::rng(seed, stream::SHUFFLE);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut bx: Vec<&[f64]> = Vec::with_capacity(cfg.batch_size);
    let mut by: Vec<usize> = Vec::with_capacity(cfg.batch_size);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            bx.clear();
            by.clear();
            for &i in chunk {
                bx.push(xs[i]);
                if let Some(&t) = targets.get(i) {
                    by.push(t);
                }
            }
            let (loss, grads) = net.loss_and_grad(&bx, &by, objective)?;
            total += loss * chunk.len() as f64;
            for t in 0..net.tensor_count() {
                sgdm_update(
                    net.tensor_mut(t),
                    velocity.tensor_mut(t),
                    grads.tensor(t),
                    cfg.learning_rate,
                    cfg.momentum,
                );
            }
        }
        let mean = total / xs.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Training(format!("loss diverged in epoch {}", epoch + 1)));
        }
        trace.push(mean);
    }
    Ok(trace)
}
