use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use super::gradcheck::ParamTensors;
use super::ops::{argmax_first, cross_entropy, softmax};
use crate::error::{param_err, Result};
use crate::featpipe::FeatureMatrix;
use crate::seed::{self, stream};
use crate::synthgrid::EventClass;

/// Layer dimensions. Convolution is valid-mode with stride 1; pooling is
/// 1 x `pool_w` with the remainder column dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CnnArch {
    pub num_filters: usize,
    pub filter_h: usize,
    pub filter_w: usize,
    pub input_h: usize,
    pub input_w: usize,
    pub num_classes: usize,
}

impl CnnArch {
    pub const NUM_FILTERS: usize = 10;
    pub const FILTER_H: usize = 2;
    pub const FILTER_W: usize = 20;
    pub const POOL_W: usize = 2;

    /// Ten 2x20 filters, clamped to the input size.
    pub fn for_input(input_h: usize, input_w: usize) -> Result<Self> {
        CnnArch::new(
            Self::NUM_FILTERS,
            Self::FILTER_H.min(input_h),
            Self::FILTER_W.min(input_w),
            input_h,
            input_w,
        )
    }

    pub fn new(num_filters: usize, filter_h: usize, filter_w: usize, input_h: usize, input_w: usize) -> Result<Self> {
        let arch = CnnArch {
            num_filters,
            filter_h,
            filter_w,
            input_h,
            input_w,
            num_classes: EventClass::COUNT,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_filters == 0 || self.filter_h == 0 || self.filter_w == 0 {
            return Err(param_err!("filter bank dimensions must be positive: {self:?}"));
        }
        if self.filter_h > self.input_h || self.filter_w > self.input_w {
            return Err(param_err!(
                "{}x{} filter does not fit a {}x{} input",
                self.filter_h,
                self.filter_w,
                self.input_h,
                self.input_w
            ));
        }
        if self.num_classes != EventClass::COUNT {
            return Err(param_err!("{} output classes, expected {}", self.num_classes, EventClass::COUNT));
        }
        Ok(())
    }

    pub fn conv_h(&self) -> usize {
        self.input_h - self.filter_h + 1
    }

    pub fn conv_w(&self) -> usize {
        self.input_w - self.filter_w + 1
    }

    /// Pooling window width: 2, or 1 when the convolution leaves a single
    /// column.
    pub fn pool_w(&self) -> usize {
        Self::POOL_W.min(self.conv_w())
    }

    pub fn pooled_w(&self) -> usize {
        self.conv_w() / self.pool_w()
    }

    pub fn flat_len(&self) -> usize {
        self.num_filters * self.conv_h() * self.pooled_w()
    }

    pub fn conv_len(&self) -> usize {
        self.num_filters * self.conv_h() * self.conv_w()
    }

    pub fn filter_len(&self) -> usize {
        self.filter_h * self.filter_w
    }
}

/// Learnable tensors, all row-major. Also used for gradients and momentum
/// buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    /// `[filter][row][col]`
    pub conv_filters: Vec<f64>,
    pub conv_biases: Vec<f64>,
    /// `[class][flat index]`
    pub fc_weights: Vec<f64>,
    pub fc_biases: Vec<f64>,
}

const TENSOR_NAMES: [&str; 4] = ["conv_filters", "conv_biases", "fc_weights", "fc_biases"];

impl CnnParams {
    pub fn zeros(arch: &CnnArch) -> Self {
        CnnParams {
            conv_filters: vec![0.0; arch.num_filters * arch.filter_len()],
            conv_biases: vec![0.0; arch.num_filters],
            fc_weights: vec![0.0; arch.num_classes * arch.flat_len()],
            fc_biases: vec![0.0; arch.num_classes],
        }
    }

    pub fn shapes_match(&self, arch: &CnnArch) -> bool {
        let z = CnnParams::zeros(arch);
        (0..4).all(|i| self.tensor(i).len() == z.tensor(i).len())
    }

    pub fn is_finite(&self) -> bool {
        (0..4).all(|i| self.tensor(i).iter().all(|v| v.is_finite()))
    }

    fn scale(&mut self, s: f64) {
        for i in 0..4 {
            self.tensor_mut(i).iter_mut().for_each(|v| *v *= s);
        }
    }
}

impl ParamTensors for CnnParams {
    fn tensor_count(&self) -> usize {
        4
    }

    fn tensor_name(&self, i: usize) -> String {
        String::from(TENSOR_NAMES[i])
    }

    fn tensor(&self, i: usize) -> &[f64] {
        match i {
            0 => &self.conv_filters,
            1 => &self.conv_biases,
            2 => &self.fc_weights,
            _ => &self.fc_biases,
        }
    }

    fn tensor_mut(&mut self, i: usize) -> &mut [f64] {
        match i {
            0 => &mut self.conv_filters,
            1 => &mut self.conv_biases,
            2 => &mut self.fc_weights,
            _ => &mut self.fc_biases,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub arch: CnnArch,
    pub params: CnnParams,
}

impl ParamTensors for CnnModel {
    fn tensor_count(&self) -> usize {
        4
    }

    fn tensor_name(&self, i: usize) -> String {
        self.params.tensor_name(i)
    }

    fn tensor(&self, i: usize) -> &[f64] {
        self.params.tensor(i)
    }

    fn tensor_mut(&mut self, i: usize) -> &mut [f64] {
        self.params.tensor_mut(i)
    }
}

/// Default standard deviation of the initial weights.
pub const INIT_STD: f64 = 0.01;

/// Weights drawn from N(0, 0.01^2), biases zero.
pub fn init_model(arch: CnnArch, seed: u64) -> Result<CnnModel> {
    init_model_with_std(arch, seed, INIT_STD)
}

/// Weights from N(0, std^2) (conv filters first, then FC weights), biases
/// zero.
pub fn init_model_with_std(arch: CnnArch, seed: u64, std: f64) -> Result<CnnModel> {
    arch.validate()?;
    let normal = Normal::new(0.0, std).map_err(|_| param_err!("initial std {std} must be finite and >= 0"))?;
    let mut rng = seed::rng(seed, stream::INIT);
    let mut params = CnnParams::zeros(&arch);
    for w in params.conv_filters.iter_mut().chain(params.fc_weights.iter_mut()) {
        *w = normal.sample(&mut rng);
    }
    Ok(CnnModel { arch, params })
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    /// Convolution output before ReLU, `[filter][row][col]`.
    pub conv: Vec<f64>,
    /// For each pooled unit, the index into `conv` it was taken from.
    pub pool_source: Vec<usize>,
    /// Pooled activations in flatten order.
    pub flat: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ForwardCache {
    /// ReLU signs and pooling selections; the loss is smooth in the
    /// parameters while this stays fixed.
    pub fn pattern(&self) -> (Vec<bool>, Vec<usize>) {
        (self.conv.iter().map(|&v| v > 0.0).collect(), self.pool_source.clone())
    }
}

/// A training or evaluation example.
pub type Example<'a> = (&'a FeatureMatrix, EventClass);

impl CnnModel {
    pub fn check_input(&self, x: &FeatureMatrix) -> Result<()> {
        if x.height() != self.arch.input_h || x.width() != self.arch.input_w {
            return Err(param_err!(
                "input is {}x{}, model expects {}x{}",
                x.height(),
                x.width(),
                self.arch.input_h,
                self.arch.input_w
            ));
        }
        Ok(())
    }

    pub fn check_shapes(&self) -> Result<()> {
        self.arch.validate()?;
        if !self.params.shapes_match(&self.arch) {
            return Err(param_err!("parameter tensors do not match {:?}", self.arch));
        }
        Ok(())
    }

    pub fn forward(&self, x: &FeatureMatrix) -> Result<ForwardCache> {
        self.check_input(x)?;
        Ok(self.forward_values(x.values()))
    }

    fn forward_values(&self, x: &[f64]) -> ForwardCache {
        let a = &self.arch;
        let p = &self.params;
        let (ch, cw, fh, fw) = (a.conv_h(), a.conv_w(), a.filter_h, a.filter_w);
        let (pw, pooled_w) = (a.pool_w(), a.pooled_w());
        let iw = a.input_w;

        let mut conv = vec![0.0; a.conv_len()];
        for f in 0..a.num_filters {
            let kernel = &p.conv_filters[f * fh * fw..(f + 1) * fh * fw];
            for r in 0..ch {
                let out = &mut conv[(f * ch + r) * cw..(f * ch + r + 1) * cw];
                out.iter_mut().for_each(|v| *v = p.conv_biases[f]);
                for i in 0..fh {
                    let row = &x[(r + i) * iw..(r + i + 1) * iw];
                    let k = &kernel[i * fw..(i + 1) * fw];
                    for (c, o) in out.iter_mut().enumerate() {
                        let window = &row[c..c + fw];
                        let mut s = 0.0;
                        for (kv, xv) in k.iter().zip(window) {
                            s += kv * xv;
                        }
                        *o += s;
                    }
                }
            }
        }

        let mut flat = vec![0.0; a.flat_len()];
        let mut pool_source = vec![0; a.flat_len()];
        for f in 0..a.num_filters {
            for r in 0..ch {
                let base = (f * ch + r) * cw;
                for q in 0..pooled_w {
                    let mut best = base + q * pw;
                    for j in 1..pw {
                        if conv[base + q * pw + j] > conv[best] {
                            best = base + q * pw + j;
                        }
                    }
                    let idx = (f * ch + r) * pooled_w + q;
                    // max and ReLU commute.
                    flat[idx] = conv[best].max(0.0);
                    pool_source[idx] = best;
                }
            }
        }

        let n = a.flat_len();
        let logits: Vec<f64> = (0..a.num_classes)
            .map(|k| {
                let w = &p.fc_weights[k * n..(k + 1) * n];
                p.fc_biases[k] + w.iter().zip(&flat).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect();
        let probs = softmax(&logits);
        ForwardCache {
            conv,
            pool_source,
            flat,
            logits,
            probs,
        }
    }

    /// Adds `scale * dLoss/dparams` of one example to `grads`, where the loss
    /// is the cross-entropy against `target`.
    fn backward(&self, x: &[f64], cache: &ForwardCache, target: usize, scale: f64, grads: &mut CnnParams) {
        let a = &self.arch;
        let p = &self.params;
        let n = a.flat_len();
        let (cw, fh, fw, iw) = (a.conv_w(), a.filter_h, a.filter_w, a.input_w);
        let plane = a.conv_h() * cw;

        let dlogits: Vec<f64> = cache
            .probs
            .iter()
            .enumerate()
            .map(|(k, &pk)| scale * (pk - if k == target { 1.0 } else { 0.0 }))
            .collect();
        let mut dflat = vec![0.0; n];
        for (k, &dk) in dlogits.iter().enumerate() {
            grads.fc_biases[k] += dk;
            let gw = &mut grads.fc_weights[k * n..(k + 1) * n];
            let w = &p.fc_weights[k * n..(k + 1) * n];
            for j in 0..n {
                gw[j] += dk * cache.flat[j];
                dflat[j] += dk * w[j];
            }
        }

        // Only the selected, positive conv units receive gradient.
        for (j, &src) in cache.pool_source.iter().enumerate() {
            if cache.conv[src] <= 0.0 || dflat[j] == 0.0 {
                continue;
            }
            let d = dflat[j];
            let f = src / plane;
            let r = (src % plane) / cw;
            let c = src % cw;
            grads.conv_biases[f] += d;
            let gk = &mut grads.conv_filters[f * fh * fw..(f + 1) * fh * fw];
            for i in 0..fh {
                let row = &x[(r + i) * iw + c..(r + i) * iw + c + fw];
                for (g, xv) in gk[i * fw..(i + 1) * fw].iter_mut().zip(row) {
                    *g += d * xv;
                }
            }
        }
    }

    /// Class probabilities.
    pub fn probabilities(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.probs)
    }

    /// Most probable class; ties go to the lowest class code.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<EventClass> {
        let cache = self.forward(x)?;
        Ok(class_of(argmax_first(&cache.logits)))
    }

    /// Mean cross-entropy over the batch and its exact gradient.
    pub fn loss_and_grad(&self, batch: &[Example<'_>]) -> Result<(f64, CnnParams)> {
        if batch.is_empty() {
            return Err(param_err!("empty batch"));
        }
        for (x, _) in batch {
            self.check_input(x)?;
        }
        let mut grads = CnnParams::zeros(&self.arch);
        let mut loss = 0.0;
        for (x, y) in batch {
            let cache = self.forward_values(x.values());
            loss += cross_entropy(&cache.logits, y.index());
            self.backward(x.values(), &cache, y.index(), 1.0, &mut grads);
        }
        let inv = 1.0 / batch.len() as f64;
        grads.scale(inv);
        Ok((loss * inv, grads))
    }

    /// Mean cross-entropy and the concatenated activation pattern of the
    /// batch.
    pub fn loss_with_pattern(&self, batch: &[Example<'_>]) -> Result<(f64, Vec<(Vec<bool>, Vec<usize>)>)> {
        if batch.is_empty() {
            return Err(param_err!("empty batch"));
        }
        let mut loss = 0.0;
        let mut patterns = Vec::with_capacity(batch.len());
        for (x, y) in batch {
            let cache = self.forward(x)?;
            loss += cross_entropy(&cache.logits, y.index());
            patterns.push(cache.pattern());
        }
        Ok((loss / batch.len() as f64, patterns))
    }

    pub fn loss(&self, batch: &[Example<'_>]) -> Result<f64> {
        Ok(self.loss_with_pattern(batch)?.0)
    }
}

fn class_of(index: usize) -> EventClass {
    EventClass::from_index(index).expect("argmax over the four class outputs")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_architecture_dims() {
        let a = CnnArch::for_input(3, 166).unwrap();
        assert_eq!((a.conv_h(), a.conv_w()), (2, 147));
        assert_eq!(a.pooled_w(), 73);
        assert_eq!(a.flat_len(), 1460);
        let m = init_model(a, 1).unwrap();
        assert_eq!(m.params.fc_weights.len(), 1460 * 4);
        assert_eq!(m.params.conv_filters.len(), 400);
    }

    #[test]
    fn clamped_architectures() {
        let a = CnnArch::for_input(1, 10).unwrap();
        assert_eq!((a.filter_h, a.filter_w), (1, 10));
        assert_eq!((a.conv_h(), a.conv_w(), a.pool_w(), a.pooled_w()), (1, 1, 1, 1));
        assert_eq!(a.flat_len(), 10);
        let a = CnnArch::for_input(3, 20).unwrap();
        assert_eq!((a.conv_h(), a.conv_w(), a.pooled_w()), (2, 1, 1));
        assert!(CnnArch::new(1, 3, 2, 2, 5).is_err());
    }

    #[test]
    fn init_statistics() {
        let m = init_model(CnnArch::for_input(3, 166).unwrap(), 42).unwrap();
        assert!(m.params.conv_biases.iter().all(|&b| b == 0.0));
        assert!(m.params.fc_biases.iter().all(|&b| b == 0.0));
        let w = &m.params.conv_filters;
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (w.len() - 1) as f64;
        let sd = libm::sqrt(var);
        assert!((0.007..=0.013).contains(&sd), "{sd}");
        assert_eq!(m, init_model(m.arch, 42).unwrap());
    }

    #[test]
    fn hand_computed_convolution() {
        let arch = CnnArch::new(1, 2, 2, 2, 3).unwrap();
        let mut m = init_model(arch, 0).unwrap();
        m.params.conv_filters = vec![1.0; 4];
        m.params.fc_weights = vec![0.0; 4];
        let x = FeatureMatrix::from_values(2, 3, vec![1.0; 6]).unwrap();
        let cache = m.forward(&x).unwrap();
        assert_eq!(cache.conv, vec![4.0, 4.0]);
        assert_eq!(cache.flat, vec![4.0]);
        assert_eq!(cache.probs, vec![0.25; 4]);
    }

    #[test]
    fn pooling_takes_pairwise_max() {
        // 1x1 identity filter exposes the pooling directly.
        let arch = CnnArch::new(1, 1, 1, 1, 4).unwrap();
        let mut m = init_model(arch, 0).unwrap();
        m.params.conv_filters = vec![1.0];
        let x = FeatureMatrix::from_values(1, 4, vec![1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(m.forward(&x).unwrap().flat, vec![3.0, 5.0]);
    }

    #[test]
    fn uniform_model_loss_is_ln4() {
        let arch = CnnArch::for_input(2, 30).unwrap();
        let m = CnnModel { arch, params: CnnParams::zeros(&arch) };
        let x = FeatureMatrix::from_values(2, 30, vec![0.5; 60]).unwrap();
        let (loss, _) = m.loss_and_grad(&[(&x, EventClass::Fault)]).unwrap();
        assert!((loss - libm::log(4.0)).abs() < 1e-15);
        assert_eq!(m.predict(&x).unwrap(), EventClass::CapacitorSwitching);
        assert!(m.loss_and_grad(&[]).is_err());
        let wrong = FeatureMatrix::from_values(2, 29, vec![0.5; 58]).unwrap();
        assert!(m.forward(&wrong).is_err());
    }
}
