//! Small numerical pieces shared by the CNN and the baseline networks.

use alloc::vec::Vec;

use libm::{exp, log};

/// Softmax with the maximum logit subtracted first.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exps: Vec<f64> = logits.iter().map(|&v| exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `-ln p[target]` computed from logits as `logsumexp - logit[target]`, so
/// saturated probabilities do not produce infinities.
pub fn cross_entropy(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let sum: f64 = logits.iter().map(|&v| exp(v - max)).sum();
    max + log(sum) - logits[target]
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax_first(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate().skip(1) {
        if v > xs[best] {
            best = i;
        }
    }
    best
}

/// `v <- momentum * v - lr * g; w <- w + v`
pub fn sgdm_update(w: &mut [f64], v: &mut [f64], g: &[f64], learning_rate: f64, momentum: f64) {
    for ((w, v), &g) in w.iter_mut().zip(v.iter_mut()).zip(g) {
        *v = momentum * *v - learning_rate * g;
        *w += *v;
    }
}
