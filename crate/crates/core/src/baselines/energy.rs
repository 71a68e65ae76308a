use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{param_err, Result};
use crate::featpipe::FeatureMatrix;

/// Statistics per interval, in this order.
pub const STATS_PER_INTERVAL: usize = 4;

pub const DEFAULT_INTERVALS: usize = 8;

/// Bus-major, interval-minor `(mean, sum, L2 norm, max abs)` of each row
/// split into `num_intervals` contiguous pieces. The last piece takes the
/// remainder.
pub fn energy_features(fm: &FeatureMatrix, num_intervals: usize) -> Result<Vec<f64>> {
    let width = fm.width();
    if num_intervals == 0 || num_intervals > width {
        return Err(param_err!(
            "{num_intervals} intervals do not fit a row of {width} coefficients"
        ));
    }
    let seg = width / num_intervals;
    let mut out = Vec::with_capacity(fm.height() * num_intervals * STATS_PER_INTERVAL);
    for r in 0..fm.height() {
        let row = fm.row(r);
        for k in 0..num_intervals {
            let end = if k + 1 == num_intervals { width } else { (k + 1) * seg };
            let piece = &row[k * seg..end];
            let sum: f64 = piece.iter().sum();
            let sq: f64 = piece.iter().map(|v| v * v).sum();
            let inf = piece.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            out.extend_from_slice(&[sum / piece.len() as f64, sum, sqrt(sq), inf]);
        }
    }
    Ok(out)
}
