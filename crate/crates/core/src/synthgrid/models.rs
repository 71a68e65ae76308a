//! Analytic disturbance models, one per event class.
//!
//! Every model returns the additive deviation from the steady-state phase
//! voltages at one monitored bus. Deviations are zero before the event
//! instant. The severity seen at a bus is scaled by [`attenuation`].

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use libm::{asin, cos, exp, floor, fmod, sin};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::types::{BusId, ClassParams, EventSpec, FaultKind, F0};

const OMEGA: f64 = TAU * F0;
const PHASE_SHIFT: f64 = TAU / 3.0;

/// Steady-state amplitude (pu) and phase offset (rad) per monitored bus.
pub(crate) fn bus_profile(bus: BusId) -> (f64, f64) {
    match bus {
        BusId::B632 => (1.0, 0.0),
        BusId::B671 => (0.985, -1.8_f64.to_radians()),
        BusId::B675 => (0.975, -2.6_f64.to_radians()),
        BusId::B634 => (0.99, -0.9_f64.to_radians()),
        BusId::B680 => (0.98, -2.0_f64.to_radians()),
    }
}

/// Electrical angle of phase `p` at `bus` and time `t`.
#[inline]
pub(crate) fn phase_angle(bus: BusId, p: usize, t: f64) -> f64 {
    let (_, offset) = bus_profile(bus);
    OMEGA * t + offset - p as f64 * PHASE_SHIFT
}

#[inline]
pub(crate) fn steady_voltage(bus: BusId, p: usize, t: f64) -> f64 {
    let (amp, _) = bus_profile(bus);
    amp * cos(phase_angle(bus, p, t))
}

/// Event-location to monitored-bus coupling, rows in [`BusId::ALL`] order,
/// columns in [`BusId::MONITORED`] order. Falls off with electrical distance
/// along the feeder.
pub const ATTENUATION: [[f64; 3]; 5] = [
    [1.00, 0.78, 0.70], // 632
    [0.80, 0.62, 0.55], // 634
    [0.78, 1.00, 0.86], // 671
    [0.68, 0.86, 1.00], // 675
    [0.64, 0.84, 0.72], // 680
];

pub fn attenuation(location: BusId, monitored: BusId) -> f64 {
    match monitored.monitored_index() {
        Some(col) => ATTENUATION[location.index()][col],
        None => 0.0,
    }
}

/// Grid sizes the parameter indices are scaled against.
pub const CAPACITOR_SIZES: u8 = 8;
pub const TAP_POSITIONS: u8 = 12;
pub const HIF_DRAWS: u8 = 6;

fn fraction(index: u8, steps: u8) -> f64 {
    if steps <= 1 {
        return 0.0;
    }
    f64::from(index.min(steps - 1)) / f64::from(steps - 1)
}

/// Capacitor bank oscillation frequency (Hz) and decay constant (s).
pub fn capacitor_oscillation(size_index: u8) -> (f64, f64) {
    let q = fraction(size_index, CAPACITOR_SIZES);
    (2000.0 - 1700.0 * q, (2.0 + 8.0 * q) * 1e-3)
}

/// Sag depth at the fault location before attenuation, for a bolted fault.
fn fault_depth_at(location: BusId) -> f64 {
    match location {
        BusId::B632 => 0.70,
        BusId::B634 => 0.50,
        BusId::B675 => 0.60,
        BusId::B680 => 0.55,
        BusId::B671 => 0.65,
    }
}

fn fault_ring_hz(location: BusId) -> f64 {
    match location {
        BusId::B632 => 7600.0,
        BusId::B634 => 5600.0,
        BusId::B675 => 6800.0,
        BusId::B680 => 6200.0,
        BusId::B671 => 7200.0,
    }
}

/// Surge impedance seen by the inception travelling wave.
const SURGE_IMPEDANCE_OHM: f64 = 400.0;

const FAULT_REF_OHM: f64 = 10.0;

/// Fraction of the bolted-fault sag retained through `resistance_ohm`.
pub fn fault_resistance_factor(resistance_ohm: f64) -> f64 {
    if resistance_ohm.is_infinite() {
        0.0
    } else {
        FAULT_REF_OHM / (FAULT_REF_OHM + resistance_ohm)
    }
}

/// Sag depth at the fault location, spanning roughly 10% to 70% over the
/// default grid and reaching zero for an open circuit.
pub fn fault_sag_depth(location: BusId, resistance_ohm: f64) -> f64 {
    fault_depth_at(location) * fault_resistance_factor(resistance_ohm)
}

const HIF_MAX_HALF_CYCLES: usize = 24;

/// Sustained arc noise relative to the ignition burst.
const ARC_NOISE_FLOOR: f64 = 0.4;

#[derive(Debug, Clone, Copy)]
struct ArcHalfCycle {
    /// Ignition level as a fraction of the local peak voltage.
    ignition: f64,
    /// Conductance-like clipping gain.
    gain: f64,
    burst_amp: f64,
    burst_hz: [f64; 3],
    burst_phase: [f64; 3],
}

/// Seeded random draws an event needs beyond its spec.
#[derive(Debug, Clone)]
pub(crate) struct EventDraws {
    arcs: Vec<ArcHalfCycle>,
    /// Index of the half cycle containing the event instant.
    first_half_cycle: i64,
}

impl EventDraws {
    pub(crate) fn new(spec: &EventSpec, rng: &mut ChaCha8Rng) -> Self {
        let mut arcs = Vec::new();
        if let ClassParams::Hif { draw_index } = spec.params {
            let q = fraction(draw_index, HIF_DRAWS);
            let nominal_ignition = 0.25 + 0.2 * q;
            let nominal_gain = 0.012 + 0.007 * q;
            for m in 0..HIF_MAX_HALF_CYCLES {
                // Negative half cycles ignite later: the arc is asymmetric.
                let bias = if m % 2 == 0 { 0.0 } else { 0.08 };
                let ignition = (nominal_ignition + bias) * rng.random_range(0.8..1.2);
                let gain = nominal_gain * rng.random_range(0.75..1.0);
                let burst_amp = rng.random_range(0.02..0.04);
                let mut burst_hz = [0.0; 3];
                let mut burst_phase = [0.0; 3];
                for i in 0..3 {
                    burst_hz[i] = rng.random_range(4000.0..9000.0);
                    burst_phase[i] = rng.random_range(0.0..TAU);
                }
                arcs.push(ArcHalfCycle {
                    ignition: ignition.min(0.9),
                    gain,
                    burst_amp,
                    burst_hz,
                    burst_phase,
                });
            }
        }
        let psi = hif_angle(spec.event_time);
        EventDraws {
            arcs,
            first_half_cycle: floor(psi / PI) as i64,
        }
    }
}

/// Angle that makes phase a at the reference bus equal to `sin(angle)`.
fn hif_angle(t: f64) -> f64 {
    OMEGA * t + PI / 2.0
}

/// Deviation of the three phase voltages at `bus` and time `t`.
pub(crate) fn disturbance(spec: &EventSpec, draws: &EventDraws, bus: BusId, t: f64) -> [f64; 3] {
    let s = t - spec.event_time;
    if s < 0.0 {
        return [0.0; 3];
    }
    let att = attenuation(spec.location, bus);
    match spec.params {
        ClassParams::Capacitor {
            size_index,
            amplitude,
        } => capacitor(spec, bus, t, s, att * amplitude, size_index),
        ClassParams::Transformer { tap_index } => transformer(spec, bus, t, s, att, tap_index),
        ClassParams::Fault {
            fault,
            resistance_ohm,
        } => fault_model(spec, bus, t, s, att, fault, resistance_ohm),
        ClassParams::Hif { .. } => hif(draws, bus, t, att),
    }
}

/// Bank energization: the bus voltage collapses toward the uncharged bank
/// and rings at the system/bank resonance, with a faster back-to-back
/// component from the neighbouring bank.
fn capacitor(spec: &EventSpec, bus: BusId, _t: f64, s: f64, scale: f64, size_index: u8) -> [f64; 3] {
    if scale == 0.0 {
        return [0.0; 3];
    }
    let (f_osc, tau) = capacitor_oscillation(size_index);
    let f_b2b = 5000.0 + 1500.0 * (1.0 - fraction(size_index, CAPACITOR_SIZES));
    let tau_b2b = 0.3e-3;
    let ring = 0.8 * exp(-s / tau) * cos(TAU * f_osc * s) + 0.2 * exp(-s / tau_b2b) * cos(TAU * f_b2b * s);
    let mut out = [0.0; 3];
    for (p, o) in out.iter_mut().enumerate() {
        let v0 = steady_voltage(bus, p, spec.event_time);
        *o = -scale * v0 * ring;
    }
    out
}

/// Inrush: decaying 2nd/3rd/5th harmonic distortion, a shallow sag, and a
/// once-per-cycle saturation notch on each phase whose flux is offset.
fn transformer(spec: &EventSpec, bus: BusId, t: f64, s: f64, att: f64, tap_index: u8) -> [f64; 3] {
    let q = fraction(tap_index, TAP_POSITIONS);
    let g = 0.5 + q;
    let tau = (3.0 + 3.0 * q) / F0;
    let env = exp(-s / tau);
    let sag = 0.05 * g / 1.5;
    let notch_depth = 0.10 + 0.10 * q;
    let (amp, _) = bus_profile(bus);
    let mut out = [0.0; 3];
    for (p, o) in out.iter_mut().enumerate() {
        let theta = phase_angle(bus, p, t);
        let harmonics = 0.08 * cos(2.0 * theta) + 0.05 * cos(3.0 * theta) + 0.03 * cos(5.0 * theta);
        let mut d = amp * g * env * harmonics - sag * env * amp * cos(theta);

        // Flux offset at energization sets notch strength and polarity.
        let flux = sin(phase_angle(BusId::B634, p, spec.event_time));
        let polarity = if flux >= 0.0 { 1.0 } else { -1.0 };
        let strength = 0.4 + 0.6 * flux.abs();
        let start_angle = if polarity > 0.0 { 35.0_f64 } else { 215.0_f64 }.to_radians();
        let cycle = 1.0 / F0;
        let local = wrap_angle(theta - start_angle) / OMEGA;
        let pulse_start = t - local;
        if pulse_start >= spec.event_time && local < cycle {
            let pulse = (1.0 - exp(-local / 0.02e-3)) * exp(-local / 1.0e-3);
            d -= polarity * notch_depth * strength * env * pulse * amp;
        }
        *o = att * d;
    }
    out
}

/// Shunt fault: step sag on the faulted phases plus a short ringing
/// transient at inception.
fn fault_model(
    spec: &EventSpec,
    bus: BusId,
    t: f64,
    s: f64,
    att: f64,
    kind: FaultKind,
    resistance_ohm: f64,
) -> [f64; 3] {
    let factor = fault_resistance_factor(resistance_ohm);
    if factor == 0.0 {
        return [0.0; 3];
    }
    let depth = fault_depth_at(spec.location) * factor * att;
    let faulted = kind.phases();
    let v: [f64; 3] = core::array::from_fn(|p| steady_voltage(bus, p, t));
    let (amp, _) = bus_profile(bus);
    let ring_hz = fault_ring_hz(spec.location);
    let ring = exp(-s / 1.2e-3) * sin(TAU * ring_hz * s);
    let surge = SURGE_IMPEDANCE_OHM / (SURGE_IMPEDANCE_OHM + 2.0 * resistance_ohm);

    let mut out = [0.0; 3];
    for p in 0..3 {
        if !faulted[p] {
            continue;
        }
        out[p] = match kind {
            FaultKind::Ll => {
                // The two faulted phases are pulled toward each other.
                let mid = (v[0] + v[1]) / 2.0;
                -depth * (v[p] - mid)
            }
            _ => -depth * v[p],
        };
        let v0 = steady_voltage(bus, p, spec.event_time) / amp;
        let sign = if v0 >= 0.0 { -1.0 } else { 1.0 };
        let ring_amp = 0.028 * surge * att * (0.4 + 0.6 * v0.abs());
        out[p] += sign * ring_amp * ring;
    }
    out
}

/// Arcing high-impedance fault on phase a: asymmetric clipping above a
/// per-half-cycle ignition level and broadband arc noise while conducting.
fn hif(draws: &EventDraws, bus: BusId, t: f64, att: f64) -> [f64; 3] {
    // Half cycles are counted on the bus 632 phase-a reference.
    let (amp, _) = bus_profile(bus);
    let psi = hif_angle(t);
    let m = floor(psi / PI) as i64;
    let rel = m - draws.first_half_cycle;
    if rel < 0 || rel as usize >= draws.arcs.len() {
        return [0.0; 3];
    }
    let arc = &draws.arcs[rel as usize];
    let u = psi - m as f64 * PI;
    let alpha = asin(arc.ignition);
    let v = amp * sin(psi);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mut d = 0.0;
    if u >= alpha && u <= PI - alpha {
        let level = sign * arc.ignition * amp;
        d -= arc.gain * (v - level);
        // Arc noise: a burst at ignition settling to a sustained level
        // until extinction.
        let since = (u - alpha) / OMEGA;
        let env = (1.0 - exp(-since / 0.02e-3)) * (ARC_NOISE_FLOOR + (1.0 - ARC_NOISE_FLOOR) * exp(-since / 0.3e-3));
        let mut burst = 0.0;
        for i in 0..3 {
            burst += sin(TAU * arc.burst_hz[i] * since + arc.burst_phase[i]);
        }
        d += arc.burst_amp * env * burst / 3.0;
    }
    [att * d, 0.0, 0.0]
}

/// Angle reduced to `[0, 2 pi)`.
fn wrap_angle(x: f64) -> f64 {
    let r = fmod(x, TAU);
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}
