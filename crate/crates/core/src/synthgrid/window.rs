use alloc::vec::Vec;

use libm::{floor, round};
use rand::Rng;

use super::record::WaveformRecord;
use super::types::BusId;
use crate::error::{param_err, Error, Result};
use crate::seed::{self, stream};

/// Default upper bound of the detection latency.
pub const DEFAULT_JITTER_S: f64 = 0.5e-3;

/// Samples in the one-cycle analysis window at `fs`: `2 * floor(fs / 120)`.
pub fn window_len(fs: f64) -> usize {
    2 * floor(fs / 120.0) as usize
}

/// One post-event cycle of every monitored bus.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub fs: f64,
    /// Index of the first sample in the source record.
    pub start: usize,
    pub buses: Vec<(BusId, [Vec<f64>; 3])>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.buses.first().map_or(0, |(_, p)| p[0].len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phases(&self, bus: BusId) -> Option<&[Vec<f64>; 3]> {
        self.buses.iter().find(|(b, _)| *b == bus).map(|(_, p)| p)
    }
}

/// Cuts the analysis window out of an event record. The window starts at the
/// event instant plus a detection latency drawn uniformly from
/// `[0, max_jitter_s]` with the record's seed.
pub fn extract_window(record: &WaveformRecord, max_jitter_s: f64) -> Result<Window> {
    let spec = record
        .spec
        .as_ref()
        .ok_or_else(|| param_err!("record has no event to window"))?;
    if !(max_jitter_s.is_finite() && max_jitter_s >= 0.0) {
        return Err(param_err!("jitter bound {max_jitter_s} must be finite and >= 0"));
    }
    let jitter = if max_jitter_s > 0.0 {
        seed::rng(record.seed, stream::JITTER).random_range(0.0..=max_jitter_s)
    } else {
        0.0
    };
    let start = round((spec.event_time + jitter) * record.fs) as usize;
    window_at(record, start)
}

/// Window of [`window_len`] samples starting at sample `start`.
pub fn window_at(record: &WaveformRecord, start: usize) -> Result<Window> {
    let w = window_len(record.fs);
    if w == 0 {
        return Err(param_err!("sampling rate {} Hz gives an empty window", record.fs));
    }
    let end = start + w;
    if end > record.len() {
        return Err(Error::Bounds(alloc::format!(
            "window [{start}, {end}) exceeds record of {} samples",
            record.len()
        )));
    }
    let buses = record
        .buses
        .iter()
        .map(|ch| {
            (
                ch.bus,
                core::array::from_fn(|p| ch.phases[p][start..end].to_vec()),
            )
        })
        .collect();
    Ok(Window {
        fs: record.fs,
        start,
        buses,
    })
}
