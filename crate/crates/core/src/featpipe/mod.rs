//! Window to classifier input: per bus, the mode-1 voltage is transformed
//! with a level-1 db4 DWT, the detail coefficients are rectified and scaled
//! by their peak, and the rows are stacked in ascending bus order.

mod dwt;

use alloc::vec::Vec;

pub use dwt::{dwt_db4_level1, idwt_db4_level1, DB4_SCALING, DB4_WAVELET};

use crate::error::{param_err, Result};
use crate::synthgrid::{BusId, EventClass, Window};

/// Peaks at or below this are treated as an all-zero row.
pub const PEAK_EPSILON: f64 = 1e-12;

/// Clarke alpha-mode voltage, `(2 va - vb - vc) / 3`.
pub fn clarke_mode1(va: &[f64], vb: &[f64], vc: &[f64]) -> Result<Vec<f64>> {
    if va.len() != vb.len() || va.len() != vc.len() {
        return Err(param_err!(
            "phase lengths differ: {}, {}, {}",
            va.len(),
            vb.len(),
            vc.len()
        ));
    }
    if va.is_empty() {
        return Err(param_err!("empty phase signals"));
    }
    Ok(va
        .iter()
        .zip(vb)
        .zip(vc)
        .map(|((&a, &b), &c)| (2.0 * a - b - c) / 3.0)
        .collect())
}

/// `|x| / max|x|`, or all zeros when the peak is not above [`PEAK_EPSILON`].
pub fn normalize_abs_peak(x: &[f64]) -> Vec<f64> {
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak > PEAK_EPSILON {
        x.iter().map(|v| v.abs() / peak).collect()
    } else {
        x.iter().map(|_| 0.0).collect()
    }
}

/// Normalized detail coefficients of one bus.
#[derive(Debug, Clone, PartialEq)]
pub struct WtcRow {
    pub bus: BusId,
    pub coeffs: Vec<f64>,
}

/// Mode-1 -> DWT detail -> peak normalization for one bus.
pub fn wtc_row(bus: BusId, va: &[f64], vb: &[f64], vc: &[f64]) -> Result<WtcRow> {
    let mode1 = clarke_mode1(va, vb, vc)?;
    let (_, detail) = dwt_db4_level1(&mode1)?;
    Ok(WtcRow {
        bus,
        coeffs: normalize_abs_peak(&detail),
    })
}

/// Stacked wavelet rows, one per selected bus, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    buses: Vec<BusId>,
    width: usize,
    values: Vec<f64>,
    pub label: Option<EventClass>,
}

impl FeatureMatrix {
    /// Stacks rows after sorting them by bus id. Rows must share a width
    /// and name distinct buses.
    pub fn from_rows(mut rows: Vec<WtcRow>, label: Option<EventClass>) -> Result<Self> {
        if rows.is_empty() {
            return Err(param_err!("feature matrix needs at least one row"));
        }
        rows.sort_by_key(|r| r.bus);
        if rows.windows(2).any(|w| w[0].bus == w[1].bus) {
            return Err(param_err!("duplicate bus rows"));
        }
        let width = rows[0].coeffs.len();
        if width == 0 || rows.iter().any(|r| r.coeffs.len() != width) {
            return Err(param_err!("rows must share a non-zero width"));
        }
        let buses = rows.iter().map(|r| r.bus).collect();
        let values = rows.into_iter().flat_map(|r| r.coeffs).collect();
        Ok(FeatureMatrix {
            buses,
            width,
            values,
            label,
        })
    }

    /// Raw constructor for arbitrary matrices (tests, synthetic inputs).
    /// `values` is row-major with `height * width` entries.
    pub fn from_values(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || values.len() != height * width {
            return Err(param_err!(
                "{} values do not form a {height}x{width} matrix",
                values.len()
            ));
        }
        if height > BusId::MONITORED.len() {
            return Err(param_err!("at most {} rows", BusId::MONITORED.len()));
        }
        Ok(FeatureMatrix {
            buses: BusId::MONITORED[..height].to_vec(),
            width,
            values,
            label: None,
        })
    }

    pub fn with_label(mut self, label: EventClass) -> Self {
        self.label = Some(label);
        self
    }

    pub fn height(&self) -> usize {
        self.buses.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn buses(&self) -> &[BusId] {
        &self.buses
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Rows of the given buses, in ascending bus order.
    pub fn select(&self, buses: &[BusId]) -> Result<FeatureMatrix> {
        let rows = buses
            .iter()
            .map(|&bus| {
                let i = self
                    .buses
                    .iter()
                    .position(|&b| b == bus)
                    .ok_or_else(|| param_err!("bus {bus} not in feature matrix"))?;
                Ok(WtcRow {
                    bus,
                    coeffs: self.row(i).to_vec(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::from_rows(rows, self.label)
    }
}

/// Applies the per-bus chain to a window and stacks the rows of `buses` in
/// ascending id order.
pub fn featurize(window: &Window, buses: &[BusId]) -> Result<FeatureMatrix> {
    if buses.is_empty() {
        return Err(param_err!("no buses selected"));
    }
    if !window.len().is_multiple_of(2) {
        return Err(param_err!("window width {} is odd", window.len()));
    }
    let rows = buses
        .iter()
        .map(|&bus| {
            let [va, vb, vc] = window
                .phases(bus)
                .ok_or_else(|| param_err!("bus {bus} missing from window"))?;
            wtc_row(bus, va, vb, vc)
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::from_rows(rows, None)
}
