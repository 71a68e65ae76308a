//! Central finite differences against analytic gradients.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{param_err, Result};

/// A set of named parameter tensors, viewed as flat slices.
pub trait ParamTensors {
    fn tensor_count(&self) -> usize;
    fn tensor_name(&self, i: usize) -> String;
    fn tensor(&self, i: usize) -> &[f64];
    fn tensor_mut(&mut self, i: usize) -> &mut [f64];

    fn param_count(&self) -> usize {
        (0..self.tensor_count()).map(|i| self.tensor(i).len()).sum()
    }
}

/// `|a - b| / max(1e-8, |a| + |b|)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub len: usize,
    pub checked: usize,
    /// Parameters whose `+h`/`-h` probes changed the ReLU or max-pool
    /// selection pattern, where the loss is not differentiable on the
    /// probe interval.
    pub skipped_kinks: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub step: f64,
    pub tensors: Vec<TensorCheck>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.tensors.iter().fold(0.0, |m, t| m.max(t.max_rel_error))
    }

    pub fn checked(&self) -> usize {
        self.tensors.iter().map(|t| t.checked).sum()
    }

    pub fn skipped(&self) -> usize {
        self.tensors.iter().map(|t| t.skipped_kinks).sum()
    }

    /// Merges per-tensor results of several checks with the same layout.
    pub fn merge(&mut self, other: &GradCheckReport) {
        if self.tensors.is_empty() {
            self.tensors = other.tensors.clone();
            return;
        }
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.checked += b.checked;
            a.skipped_kinks += b.skipped_kinks;
            a.max_rel_error = a.max_rel_error.max(b.max_rel_error);
        }
    }
}

/// Perturbs every parameter of `model` by `+-h` and compares
/// `(L(w+h) - L(w-h)) / 2h` with `analytic`. `probe` returns the loss and an
/// activation pattern; a parameter is skipped when either probe's pattern
/// differs from the unperturbed one.
pub fn check_gradients<M, G, P, F>(model: &M, analytic: &G, h: f64, probe: F) -> Result<GradCheckReport>
where
    M: ParamTensors + Clone,
    G: ParamTensors,
    P: PartialEq,
    F: Fn(&M) -> Result<(f64, P)>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(param_err!("finite-difference step {h} must be positive"));
    }
    if model.tensor_count() != analytic.tensor_count() {
        return Err(param_err!("gradient has a different tensor layout than the model"));
    }
    let (_, base_pattern) = probe(model)?;
    let mut work = model.clone();
    let mut tensors = Vec::with_capacity(model.tensor_count());
    for t in 0..model.tensor_count() {
        let grad = analytic.tensor(t);
        let len = model.tensor(t).len();
        if grad.len() != len {
            return Err(param_err!("gradient tensor {t} has {} entries, expected {len}", grad.len()));
        }
        let mut check = TensorCheck {
            name: model.tensor_name(t),
            len,
            checked: 0,
            skipped_kinks: 0,
            max_rel_error: 0.0,
        };
        for i in 0..len {
            let w = model.tensor(t)[i];
            work.tensor_mut(t)[i] = w + h;
            let (up, up_pattern) = probe(&work)?;
            work.tensor_mut(t)[i] = w - h;
            let (down, down_pattern) = probe(&work)?;
            work.tensor_mut(t)[i] = w;
            if up_pattern != base_pattern || down_pattern != base_pattern {
                check.skipped_kinks += 1;
                continue;
            }
            let numeric = (up - down) / (2.0 * h);
            check.checked += 1;
            check.max_rel_error = check.max_rel_error.max(relative_error(grad[i], numeric));
        }
        tensors.push(check);
    }
    Ok(GradCheckReport { step: h, tensors })
}
