//! Confusion matrix and one-vs-rest classification metrics.
//!
//! Rows of the confusion matrix are predicted classes, columns are target
//! classes. Per class, every other class is folded into "negative":
//!
//! - PRE = TP / (TP + FP)
//! - REC = TP / (TP + FN)
//! - F1  = 2 PRE REC / (PRE + REC)
//! - FPR = FP / (FP + TN)
//!
//! A ratio with a zero denominator is `None` (undefined), never NaN. Macro
//! averages skip undefined values and count them; the macro F1 is the
//! harmonic combination of macro PRE and macro REC.

use crate::error::{param_err, Result};
use crate::synthgrid::EventClass;

const K: usize = EventClass::COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMatrix {
    /// `counts[predicted][target]`
    pub counts: [[u64; K]; K],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; K]; K]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..K).map(|i| self.counts[i][i]).sum()
    }

    /// Row sum: how often `class` was predicted.
    pub fn predicted(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    /// Column sum: how often `class` was the target.
    pub fn actual(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    pub fn add(&mut self, predicted: EventClass, target: EventClass) {
        self.counts[predicted.index()][target.index()] += 1;
    }
}

/// Tallies `(prediction, target)` pairs given as class codes 1..=4.
pub fn confusion(preds: &[u8], targets: &[u8]) -> Result<ConfusionMatrix> {
    if preds.len() != targets.len() {
        return Err(param_err!(
            "{} predictions for {} targets",
            preds.len(),
            targets.len()
        ));
    }
    if preds.is_empty() {
        return Err(param_err!("no predictions to tally"));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in preds.iter().zip(targets) {
        let p = EventClass::from_code(p).ok_or_else(|| param_err!("label {p} out of range 1..=4"))?;
        let t = EventClass::from_code(t).ok_or_else(|| param_err!("label {t} out of range 1..=4"))?;
        cm.add(p, t);
    }
    Ok(cm)
}

/// Same as [`confusion`] for typed labels; cannot fail on range.
pub fn confusion_of(preds: &[EventClass], targets: &[EventClass]) -> Result<ConfusionMatrix> {
    let p: alloc::vec::Vec<u8> = preds.iter().map(|c| c.code()).collect();
    let t: alloc::vec::Vec<u8> = targets.iter().map(|c| c.code()).collect();
    confusion(&p, &t)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn f1(pre: Option<f64>, rec: Option<f64>) -> Option<f64> {
    let (p, r) = (pre?, rec?);
    (p + r > 0.0).then(|| 2.0 * p * r / (p + r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassMetrics {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub fpr: Option<f64>,
}

impl ClassMetrics {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        ClassMetrics {
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f1: f1(precision, recall),
            fpr: ratio(fp, fp + tn),
        }
    }
}

/// One-vs-rest metrics of `class` (zero-based index).
pub fn class_metrics(cm: &ConfusionMatrix, class: usize) -> Result<ClassMetrics> {
    if class >= K {
        return Err(param_err!("class index {class} out of range"));
    }
    let tp = cm.counts[class][class];
    let fp = cm.predicted(class) - tp;
    let fn_ = cm.actual(class) - tp;
    let tn = cm.total() - tp - fp - fn_;
    Ok(ClassMetrics::from_counts(tp, fp, fn_, tn))
}

/// Averaged metrics. `None` where no class had a defined value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Averages {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub fpr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Exclusions {
    pub precision: usize,
    pub recall: usize,
    pub fpr: usize,
}

impl Exclusions {
    pub fn total(&self) -> usize {
        self.precision + self.recall + self.fpr
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub per_class: [ClassMetrics; K],
    pub macro_avg: Averages,
    pub micro_avg: Averages,
    /// Classes left out of each macro mean because their value was undefined.
    pub excluded: Exclusions,
}

fn defined_mean(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let (mut sum, mut n, mut skipped) = (0.0, 0usize, 0usize);
    for v in values {
        match v {
            Some(v) => {
                sum += v;
                n += 1;
            }
            None => skipped += 1,
        }
    }
    ((n > 0).then(|| sum / n as f64), skipped)
}

/// Accuracy, per-class metrics and macro/micro aggregates.
pub fn aggregate(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(param_err!("empty confusion matrix"));
    }
    let per_class: [ClassMetrics; K] = core::array::from_fn(|c| {
        class_metrics(cm, c).expect("class index in range")
    });
    let (pre, pre_skip) = defined_mean(per_class.iter().map(|m| m.precision));
    let (rec, rec_skip) = defined_mean(per_class.iter().map(|m| m.recall));
    let (fpr, fpr_skip) = defined_mean(per_class.iter().map(|m| m.fpr));

    let pooled = per_class.iter().fold([0u64; 4], |acc, m| {
        [acc[0] + m.tp, acc[1] + m.fp, acc[2] + m.fn_, acc[3] + m.tn]
    });
    let micro = ClassMetrics::from_counts(pooled[0], pooled[1], pooled[2], pooled[3]);

    Ok(MetricsReport {
        confusion: *cm,
        accuracy: cm.correct() as f64 / total as f64,
        per_class,
        macro_avg: Averages {
            precision: pre,
            recall: rec,
            f1: f1(pre, rec),
            fpr,
        },
        micro_avg: Averages {
            precision: micro.precision,
            recall: micro.recall,
            f1: micro.f1,
            fpr: micro.fpr,
        },
        excluded: Exclusions {
            precision: pre_skip,
            recall: rec_skip,
            fpr: fpr_skip,
        },
    })
}

/// Percentage with two decimals, rounding half up.
pub fn percent_2dp(fraction: f64) -> f64 {
    libm::floor(fraction * 10_000.0 + 0.5) / 100.0
}
