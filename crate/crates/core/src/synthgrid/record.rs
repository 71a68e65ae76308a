use alloc::vec;
use alloc::vec::Vec;

use libm::{ceil, pow, round, sqrt};
use rand_distr::{Distribution, StandardNormal};

use super::models::{bus_profile, disturbance, steady_voltage, EventDraws};
use super::types::{BusId, EventSpec, F0};
use crate::error::{param_err, Result};
use crate::seed::{self, stream};

/// Default record length: nine cycles.
pub const DEFAULT_DURATION: f64 = 0.15;
pub const DEFAULT_SNR_DB: f64 = 60.0;

/// Disturbances are evaluated at no less than this rate and brought down to
/// the unit's sampling rate through its decimation filter.
const INTERNAL_RATE_MIN: f64 = 160_000.0;

/// Three phase-voltage channels of one monitored bus.
#[derive(Debug, Clone, PartialEq)]
pub struct BusChannels {
    pub bus: BusId,
    /// Phases a, b, c in per-unit.
    pub phases: [Vec<f64>; 3],
}

/// Time-aligned samples of every monitored bus for one generated event (or
/// for the steady state when `spec` is `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformRecord {
    pub spec: Option<EventSpec>,
    pub fs: f64,
    pub duration: f64,
    pub seed: u64,
    pub buses: Vec<BusChannels>,
}

impl WaveformRecord {
    pub fn len(&self) -> usize {
        self.buses.first().map_or(0, |b| b.phases[0].len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self, bus: BusId) -> Option<&BusChannels> {
        self.buses.iter().find(|b| b.bus == bus)
    }
}

pub fn sample_count(fs: f64, duration: f64) -> usize {
    round(fs * duration) as usize
}

/// Signal-chain settings shared by every record of a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthConfig {
    /// Measurement SNR in dB; `None` means noiseless.
    pub snr_db: Option<f64>,
    pub duration: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            snr_db: Some(DEFAULT_SNR_DB),
            duration: DEFAULT_DURATION,
        }
    }
}

impl SynthConfig {
    pub fn noiseless() -> Self {
        SynthConfig {
            snr_db: None,
            ..Self::default()
        }
    }

    fn check(&self, fs: f64) -> Result<()> {
        if !(fs.is_finite() && fs >= 1000.0) {
            return Err(param_err!("sampling rate {fs} Hz below 1 kHz"));
        }
        if !(self.duration.is_finite() && self.duration >= 0.1) {
            return Err(param_err!("duration {} s below 0.1 s", self.duration));
        }
        if let Some(snr) = self.snr_db {
            if snr.is_nan() {
                return Err(param_err!("SNR is NaN"));
            }
        }
        Ok(())
    }

    /// Balanced steady-state record with measurement noise.
    pub fn steady(&self, fs: f64, seed: u64) -> Result<WaveformRecord> {
        self.check(fs)?;
        let n = sample_count(fs, self.duration);
        let mut buses: Vec<BusChannels> = BusId::MONITORED
            .iter()
            .map(|&bus| BusChannels {
                bus,
                phases: core::array::from_fn(|p| {
                    (0..n).map(|i| steady_voltage(bus, p, i as f64 / fs)).collect()
                }),
            })
            .collect();
        self.add_noise(&mut buses, seed);
        Ok(WaveformRecord {
            spec: None,
            fs,
            duration: self.duration,
            seed,
            buses,
        })
    }

    /// Steady state plus the disturbance of `spec`. Noise is drawn from the
    /// same stream as [`SynthConfig::steady`], so a zero disturbance
    /// reproduces the steady record exactly.
    pub fn event(&self, spec: &EventSpec, fs: f64, seed: u64) -> Result<WaveformRecord> {
        self.check(fs)?;
        spec.validate()?;
        let cycle = 1.0 / F0;
        if !(spec.event_time > cycle && spec.event_time < self.duration - 2.0 * cycle) {
            return Err(param_err!(
                "event time {} s must lie in ({cycle} s, {} s)",
                spec.event_time,
                self.duration - 2.0 * cycle
            ));
        }
        let n = sample_count(fs, self.duration);
        let draws = EventDraws::new(spec, &mut seed::rng(seed, stream::EVENT));
        let chain = Decimator::new(fs);

        let mut buses = Vec::with_capacity(3);
        for &bus in &BusId::MONITORED {
            let dist = chain.sample(n, spec.event_time, |t| disturbance(spec, &draws, bus, t));
            let phases = core::array::from_fn(|p| {
                (0..n)
                    .map(|i| steady_voltage(bus, p, i as f64 / fs) + dist[p][i])
                    .collect()
            });
            buses.push(BusChannels { bus, phases });
        }
        self.add_noise(&mut buses, seed);
        Ok(WaveformRecord {
            spec: Some(*spec),
            fs,
            duration: self.duration,
            seed,
            buses,
        })
    }

    fn add_noise(&self, buses: &mut [BusChannels], seed: u64) {
        let Some(snr) = self.snr_db else { return };
        if snr.is_infinite() && snr > 0.0 {
            return;
        }
        let mut rng = seed::rng(seed, stream::NOISE);
        for ch in buses {
            let (amp, _) = bus_profile(ch.bus);
            let sigma = amp / sqrt(2.0) * pow(10.0, -snr / 20.0);
            for phase in ch.phases.iter_mut() {
                for x in phase.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *x += sigma * z;
                }
            }
        }
    }
}

/// Third-order cascaded-integrator-comb decimator: the disturbance is
/// evaluated on a grid `factor` times finer than `fs`, then averaged through
/// a centered sinc^3 kernel at each output instant.
struct Decimator {
    fs: f64,
    factor: usize,
    kernel: Vec<f64>,
}

impl Decimator {
    fn new(fs: f64) -> Self {
        let factor = (ceil(INTERNAL_RATE_MIN / fs) as usize).max(1);
        let boxcar = vec![1.0 / factor as f64; factor];
        let mut kernel = vec![1.0];
        for _ in 0..3 {
            kernel = convolve(&kernel, &boxcar);
        }
        Decimator { fs, factor, kernel }
    }

    /// Returns `n` output samples per phase of `f`, which must vanish
    /// before `onset`.
    fn sample(&self, n: usize, onset: f64, f: impl Fn(f64) -> [f64; 3]) -> [Vec<f64>; 3] {
        let k = self.factor;
        let taps = self.kernel.len();
        let centre = (taps - 1) as f64 / 2.0;
        let fine_rate = self.fs * k as f64;
        let fine_len = (n.max(1) - 1) * k + taps;
        let time = |j: usize| (j as f64 - centre) / fine_rate;

        let mut fine = vec![[0.0; 3]; fine_len];
        for (j, slot) in fine.iter_mut().enumerate() {
            let t = time(j);
            if t >= onset {
                *slot = f(t);
            }
        }
        let mut out: [Vec<f64>; 3] = core::array::from_fn(|_| vec![0.0; n]);
        for i in 0..n {
            let base = i * k;
            if time(base + taps - 1) < onset {
                continue;
            }
            let mut acc = [0.0; 3];
            for (m, &w) in self.kernel.iter().enumerate() {
                let v = fine[base + m];
                acc[0] += w * v[0];
                acc[1] += w * v[1];
                acc[2] += w * v[2];
            }
            for p in 0..3 {
                out[p][i] = acc[p];
            }
        }
        out
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimator_kernel_has_unit_gain_and_expected_length() {
        let d = Decimator::new(20_000.0);
        assert_eq!(d.factor, 8);
        assert_eq!(d.kernel.len(), 3 * 8 - 2);
        let sum: f64 = d.kernel.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let d = Decimator::new(200_000.0);
        assert_eq!(d.kernel, vec![1.0]);
    }

    #[test]
    fn decimator_passes_slow_signals() {
        let d = Decimator::new(20_000.0);
        let out = d.sample(40, 0.0, |t| [1.0 + t, 0.0, 0.0]);
        // Linear signals pass through a symmetric unit-gain kernel unchanged.
        for (i, v) in out[0].iter().enumerate().skip(2) {
            assert!((v - (1.0 + i as f64 / 20_000.0)).abs() < 1e-12);
        }
    }
}
