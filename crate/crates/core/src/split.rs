//! Stratified train/test split with largest-remainder apportionment of the
//! test quota.

use alloc::format;
use alloc::vec::Vec;

use libm::{floor, round};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::{self, stream};
use crate::synthgrid::EventClass;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndex {
    /// Ascending indices into the dataset.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Quotas closer than this to an integer are treated as that integer.
const QUOTA_SNAP: f64 = 1e-9;

fn snap(x: f64) -> f64 {
    let r = round(x);
    if (x - r).abs() < QUOTA_SNAP {
        r
    } else {
        x
    }
}

/// Test-set size per class: `(1 - train_fraction) * N` seats (halves round
/// up) shared by largest remainder of each class's exact quota. Ties go to
/// the lower class.
pub fn apportion_test_counts(counts: &[usize; 4], train_fraction: f64) -> Result<[usize; 4]> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    let test_fraction = 1.0 - train_fraction;
    let total: usize = counts.iter().sum();
    // Half seats round up, also when the product lands just below the half.
    let seats = floor(test_fraction * total as f64 + 0.5 + QUOTA_SNAP) as usize;

    let quotas: [f64; 4] = core::array::from_fn(|c| snap(test_fraction * counts[c] as f64));
    let mut out: [usize; 4] = core::array::from_fn(|c| floor(quotas[c]) as usize);
    let assigned: usize = out.iter().sum();
    let mut order: [usize; 4] = [0, 1, 2, 3];
    // Remainders are compared at the snap resolution so that quotas equal in
    // exact arithmetic tie; the stable sort then keeps lower classes first.
    let key = |c: usize| round((quotas[c] - floor(quotas[c])) / QUOTA_SNAP) as u64;
    order.sort_by_key(|&c| core::cmp::Reverse(key(c)));
    let mut remaining = seats.saturating_sub(assigned);
    for &c in order.iter().cycle().take(4 * 4) {
        if remaining == 0 {
            break;
        }
        if out[c] < counts[c] {
            out[c] += 1;
            remaining -= 1;
        }
    }
    Ok(out)
}

/// Shuffles each class with the seeded generator and takes the apportioned
/// number of test items from the front.
pub fn split_stratified(labels: &[EventClass], train_fraction: f64, seed: u64) -> Result<SplitIndex> {
    let mut by_class: [Vec<usize>; 4] = Default::default();
    for (i, c) in labels.iter().enumerate() {
        by_class[c.index()].push(i);
    }
    let counts: [usize; 4] = core::array::from_fn(|c| by_class[c].len());
    if let Some(empty) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Config(format!(
            "class {} has no records",
            EventClass::ALL[empty]
        )));
    }
    let test_counts = apportion_test_counts(&counts, train_fraction)?;
    let mut rng = seed::rng(seed, stream::SPLIT);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (members, &n_test) in by_class.iter_mut().zip(&test_counts) {
        members.shuffle(&mut rng);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndex { train, test })
}
