mod oracle;

use proptest::prelude::*;
use swec_core::metrics::{aggregate, class_metrics, confusion, percent_2dp, ConfusionMatrix};

/// Reference CNN run, `[predicted][target]`.
const CNN_MATRIX: [[u64; 4]; 4] = [[13, 0, 0, 0], [0, 29, 1, 0], [0, 0, 60, 2], [0, 0, 3, 12]];

/// Reference autoencoder run.
const AUTOENCODER_MATRIX: [[u64; 4]; 4] = [[0, 5, 8, 0], [0, 23, 6, 0], [0, 6, 58, 0], [0, 6, 8, 0]];

#[test]
fn cnn_matrix_reproduces_table_row() {
    let cm = ConfusionMatrix::from_counts(CNN_MATRIX);
    assert_eq!(cm.total(), 120);
    let r = aggregate(&cm).unwrap();
    let pct = |x: Option<f64>| 100.0 * x.unwrap();
    assert!((100.0 * r.accuracy - 95.00).abs() <= 0.01);
    assert!((pct(r.macro_avg.precision) - 93.36).abs() <= 0.01);
    assert!((pct(r.macro_avg.recall) - 94.87).abs() <= 0.01);
    assert!((pct(r.macro_avg.f1) - 94.11).abs() <= 0.01);
    assert!((pct(r.macro_avg.fpr) - 1.875).abs() <= 0.001);
    assert!((pct(r.macro_avg.fpr) - 1.86).abs() <= 0.05);
    assert_eq!(r.excluded.total(), 0);
}

#[test]
fn cnn_matrix_reproduces_margin_cells() {
    let cm = ConfusionMatrix::from_counts(CNN_MATRIX);
    let precision = [100.0, 96.7, 96.8, 80.0];
    let recall = [100.0, 100.0, 93.8, 85.7];
    for c in 0..4 {
        let m = class_metrics(&cm, c).unwrap();
        assert!((100.0 * m.precision.unwrap() - precision[c]).abs() <= 0.05, "class {c}");
        assert!((100.0 * m.recall.unwrap() - recall[c]).abs() <= 0.05, "class {c}");
        let (p, r, f) = oracle::one_vs_rest(&CNN_MATRIX, c);
        assert!((m.precision.unwrap() - p).abs() < 1e-15);
        assert!((m.recall.unwrap() - r).abs() < 1e-15);
        assert!((m.fpr.unwrap() - f).abs() < 1e-15);
    }
}

#[test]
fn hand_computed_false_positive_rates() {
    let cm = ConfusionMatrix::from_counts(CNN_MATRIX);
    let expect = [0.0, 1.0 / 91.0, 2.0 / 56.0, 3.0 / 106.0];
    for (c, e) in expect.iter().enumerate() {
        assert!((class_metrics(&cm, c).unwrap().fpr.unwrap() - e).abs() < 1e-15);
    }
    let mean = expect.iter().sum::<f64>() / 4.0;
    assert!((aggregate(&cm).unwrap().macro_avg.fpr.unwrap() - mean).abs() < 1e-15);
}

#[test]
fn autoencoder_matrix_has_undefined_precisions() {
    let cm = ConfusionMatrix::from_counts(AUTOENCODER_MATRIX);
    let r = aggregate(&cm).unwrap();
    assert_eq!(percent_2dp(r.accuracy), 67.5);
    // Classes 1 and 4 are predicted but never right: precision 0, recall 0/0.
    assert_eq!(r.per_class[0].precision, Some(0.0));
    assert_eq!(r.per_class[0].recall, None);
    assert_eq!(r.per_class[3].recall, None);
    assert_eq!(r.excluded.recall, 2);
    assert!((100.0 * r.per_class[1].recall.unwrap() - 57.5).abs() < 0.05);
    assert!((100.0 * r.per_class[2].recall.unwrap() - 72.5).abs() < 0.05);
}

#[test]
fn codes_outside_one_to_four_are_rejected() {
    assert!(confusion(&[0], &[1]).is_err());
    assert!(confusion(&[1], &[5]).is_err());
    assert!(confusion(&[1, 2], &[1]).is_err());
    assert!(confusion(&[], &[]).is_err());
}

fn matrices() -> impl Strategy<Value = [[u64; 4]; 4]> {
    prop::array::uniform4(prop::array::uniform4(0u64..40)).prop_filter("non-empty", |m| {
        m.iter().flatten().sum::<u64>() > 0
    })
}

proptest! {
    #[test]
    fn micro_averages_equal_accuracy(m in matrices()) {
        let r = aggregate(&ConfusionMatrix::from_counts(m)).unwrap();
        for v in [r.micro_avg.precision, r.micro_avg.recall, r.micro_avg.f1] {
            prop_assert!((v.unwrap() - r.accuracy).abs() < 1e-12);
        }
    }

    #[test]
    fn per_class_counts_partition_the_total(m in matrices()) {
        let cm = ConfusionMatrix::from_counts(m);
        let r = aggregate(&cm).unwrap();
        for c in &r.per_class {
            prop_assert_eq!(c.tp + c.fp + c.fn_ + c.tn, cm.total());
            for v in [c.precision, c.recall, c.f1, c.fpr].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn macro_values_survive_relabeling(m in matrices(), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let mut p = [[0u64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                p[perm[i]][perm[j]] = m[i][j];
            }
        }
        let a = aggregate(&ConfusionMatrix::from_counts(m)).unwrap();
        let b = aggregate(&ConfusionMatrix::from_counts(p)).unwrap();
        let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs() < 1e-12,
            (None, None) => true,
            _ => false,
        };
        prop_assert!(close(a.macro_avg.precision, b.macro_avg.precision));
        prop_assert!(close(a.macro_avg.recall, b.macro_avg.recall));
        prop_assert!(close(a.macro_avg.f1, b.macro_avg.f1));
        prop_assert!(close(a.macro_avg.fpr, b.macro_avg.fpr));
        prop_assert_eq!(a.accuracy, b.accuracy);
    }

    #[test]
    fn tally_counts_every_pair(pairs in prop::collection::vec((1u8..=4, 1u8..=4), 1..300)) {
        let (p, t): (Vec<u8>, Vec<u8>) = pairs.iter().cloned().unzip();
        let cm = confusion(&p, &t).unwrap();
        prop_assert_eq!(cm.total(), pairs.len() as u64);
        for (a, b) in &pairs {
            prop_assert!(cm.counts[*a as usize - 1][*b as usize - 1] > 0);
        }
    }
}
