use std::f64::consts::TAU;

use swec_core::featpipe::{clarke_mode1, dwt_db4_level1, featurize};
use swec_core::synthgrid::{
    build_dataset, extract_window, fault_sag_depth, plan_dataset, window_at, window_len, BusId, ClassParams,
    DatasetConfig, EventClass, EventSpec, FaultKind, SynthConfig, WaveformRecord, DEFAULT_COUNTS, DEFAULT_JITTER_S,
    FAULT_LOCATIONS, F0,
};
use swec_core::Error;

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn capacitor(amplitude: f64) -> EventSpec {
    let params = ClassParams::Capacitor {
        size_index: 3,
        amplitude,
    };
    EventSpec::new(EventClass::CapacitorSwitching, 45.0, BusId::B675, params).unwrap()
}

fn fault(location: BusId, kind: FaultKind, resistance_ohm: f64) -> EventSpec {
    let params = ClassParams::Fault {
        fault: kind,
        resistance_ohm,
    };
    EventSpec::new(EventClass::Fault, 100.0, location, params).unwrap()
}

#[test]
fn noiseless_steady_state_is_a_balanced_cosine() {
    let fs = 20_000.0;
    let rec = SynthConfig::noiseless().steady(fs, 3).unwrap();
    assert_eq!(rec.len(), 3000);
    let ch = rec.channels(BusId::B632).unwrap();
    for (p, phase) in ch.phases.iter().enumerate() {
        for (i, v) in phase.iter().enumerate() {
            let t = i as f64 / fs;
            let expect = (TAU * F0 * t - p as f64 * TAU / 3.0).cos();
            assert!((v - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn steady_rms_matches_amplitude_over_whole_cycles() {
    let fs = 18_000.0;
    let per_cycle = 300;
    let rec = SynthConfig::noiseless().steady(fs, 0).unwrap();
    for ch in &rec.buses {
        let peak = ch.phases[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((0.9..=1.1).contains(&peak), "bus {} peak {peak}", ch.bus);
        for phase in &ch.phases {
            for cycle in phase.chunks_exact(per_cycle) {
                assert!((rms(cycle) - peak / 2f64.sqrt()).abs() < 1e-3);
            }
        }
    }
}

#[test]
fn generation_is_deterministic() {
    let cfg = SynthConfig::default();
    let spec = fault(BusId::B634, FaultKind::Llg, 5.0);
    assert_eq!(cfg.event(&spec, 10_000.0, 42).unwrap(), cfg.event(&spec, 10_000.0, 42).unwrap());
    assert_ne!(cfg.event(&spec, 10_000.0, 42).unwrap(), cfg.event(&spec, 10_000.0, 43).unwrap());
    assert_eq!(cfg.steady(5_000.0, 1).unwrap(), cfg.steady(5_000.0, 1).unwrap());
}

fn same_samples(a: &WaveformRecord, b: &WaveformRecord) -> bool {
    a.buses.iter().zip(&b.buses).all(|(x, y)| x.phases == y.phases)
}

#[test]
fn zero_amplitude_capacitor_equals_steady_state() {
    let cfg = SynthConfig::default();
    let steady = cfg.steady(20_000.0, 9).unwrap();
    let event = cfg.event(&capacitor(0.0), 20_000.0, 9).unwrap();
    assert!(same_samples(&steady, &event));
    let visible = cfg.event(&capacitor(1.0), 20_000.0, 9).unwrap();
    assert!(!same_samples(&steady, &visible));
}

#[test]
fn open_circuit_fault_equals_steady_state() {
    let cfg = SynthConfig::default();
    let steady = cfg.steady(20_000.0, 4).unwrap();
    for kind in FaultKind::ALL {
        let event = cfg.event(&fault(BusId::B632, kind, f64::INFINITY), 20_000.0, 4).unwrap();
        assert!(same_samples(&steady, &event));
    }
    assert_eq!(fault_sag_depth(BusId::B680, f64::INFINITY), 0.0);
}

#[test]
fn sag_depth_never_grows_with_resistance() {
    let resistances = [0.0, 1.0, 2.5, 5.0, 10.0, 20.0, 50.0, 1e3, f64::INFINITY];
    let cfg = SynthConfig::noiseless();
    let fs = 18_000.0;
    for location in FAULT_LOCATIONS {
        let depths: Vec<f64> = resistances.iter().map(|&r| fault_sag_depth(location, r)).collect();
        assert!(depths.windows(2).all(|w| w[1] <= w[0]), "{location}: {depths:?}");
        assert!(depths[0] <= 0.7 && depths[4] >= 0.1 * 0.5);

        // Measured: RMS of phase a at 632 over the last whole cycle.
        let post_rms: Vec<f64> = resistances
            .iter()
            .map(|&r| {
                let rec = cfg.event(&fault(location, FaultKind::Lg, r), fs, 0).unwrap();
                let a = &rec.channels(BusId::B632).unwrap().phases[0];
                rms(&a[a.len() - 300..])
            })
            .collect();
        assert!(post_rms.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{location}: {post_rms:?}");
    }
}

#[test]
fn hif_stays_within_two_percent_rms_of_steady_state() {
    let fs = 18_000.0;
    let per_cycle = 300;
    let cfg = SynthConfig::noiseless();
    let steady = cfg.steady(fs, 0).unwrap();
    let grid = DatasetConfig::new(0, fs).grid;
    let mut worst = 0.0f64;
    for location in &grid.hif.locations {
        for draw_index in 0..grid.hif.draws {
            let spec = EventSpec::new(
                EventClass::HighImpedanceFault,
                135.0,
                *location,
                ClassParams::Hif { draw_index },
            )
            .unwrap();
            for seed in 0..4 {
                let rec = cfg.event(&spec, fs, seed).unwrap();
                for (ev, st) in rec.buses.iter().zip(&steady.buses) {
                    for p in 0..3 {
                        let dev: Vec<f64> = ev.phases[p].iter().zip(&st.phases[p]).map(|(a, b)| a - b).collect();
                        for cycle in dev.chunks_exact(per_cycle) {
                            worst = worst.max(rms(cycle));
                        }
                    }
                }
            }
        }
    }
    // Nominal RMS is 1/sqrt(2) pu.
    let limit = 0.02 / 2f64.sqrt();
    assert!(worst > 0.0 && worst <= limit, "worst per-cycle deviation {worst}, limit {limit}");
}

#[test]
fn records_have_declared_length_and_event_placement() {
    let cfg = DatasetConfig::new(1, 5_000.0);
    let plan = plan_dataset(&cfg).unwrap();
    assert_eq!(plan.len(), 600);
    let cycle = 1.0 / F0;
    for e in plan.iter().step_by(37) {
        assert!(e.spec.event_time > cycle && e.spec.event_time < 0.15 - 2.0 * cycle);
        let rec = e.synthesize(&cfg).unwrap();
        assert_eq!(rec.len(), 750);
        assert!(rec.buses.iter().all(|b| b.phases.iter().all(|p| p.len() == 750)));
    }
}

#[test]
fn default_grid_reproduces_class_counts() {
    let cfg = DatasetConfig::new(0, 1_250.0);
    let ds = build_dataset(&cfg).unwrap();
    assert_eq!(ds.counts(), DEFAULT_COUNTS);
    assert_eq!(ds.records.len(), 600);
    assert_eq!(build_dataset(&cfg).unwrap(), ds);
    let mut other = cfg.clone();
    other.seed = 1;
    assert_ne!(build_dataset(&other).unwrap().records, ds.records);
}

#[test]
fn grid_count_mismatch_is_a_configuration_error() {
    let mut cfg = DatasetConfig::new(0, 1_250.0);
    cfg.grid.fault.angles = 3;
    assert!(matches!(plan_dataset(&cfg), Err(Error::Config(_))));
    cfg.grid.counts[2] = 240;
    assert_eq!(plan_dataset(&cfg).unwrap().len(), 520);
}

#[test]
fn window_lengths_and_zero_jitter_start() {
    assert_eq!(window_len(20_000.0), 332);
    assert_eq!(window_len(1_250.0), 20);
    let cfg = SynthConfig::default();
    let spec = capacitor(1.0);
    let rec = cfg.event(&spec, 20_000.0, 2).unwrap();
    let w = extract_window(&rec, 0.0).unwrap();
    let k = (spec.event_time * 20_000.0).round() as usize;
    assert_eq!(w.start, k);
    assert_eq!(w.len(), 332);
    assert_eq!(w.buses[0].1[0], rec.buses[0].phases[0][k..k + 332]);
    let jittered = extract_window(&rec, DEFAULT_JITTER_S).unwrap();
    assert!(jittered.start >= k && jittered.start <= k + 10);
    assert!(matches!(window_at(&rec, rec.len() - 100), Err(Error::Bounds(_))));
}

#[test]
fn invalid_specs_and_rates_are_rejected() {
    let cfg = SynthConfig::default();
    assert!(cfg.steady(999.0, 0).is_err());
    let mut spec = capacitor(1.0);
    spec.class = EventClass::Fault;
    assert!(cfg.event(&spec, 20_000.0, 0).is_err());
    let params = ClassParams::Fault {
        fault: FaultKind::Lg,
        resistance_ohm: 0.0,
    };
    assert!(EventSpec::new(EventClass::Fault, 10.0, BusId::B671, params).is_err());
    assert!(EventSpec::new(EventClass::Fault, 360.0, BusId::B632, params).is_err());
    let short = SynthConfig {
        duration: 0.05,
        ..SynthConfig::default()
    };
    assert!(short.steady(20_000.0, 0).is_err());
}

fn detail_energy(window: &swec_core::synthgrid::Window, bus: BusId) -> f64 {
    let [a, b, c] = window.phases(bus).unwrap();
    let m = clarke_mode1(a, b, c).unwrap();
    let (_, d) = dwt_db4_level1(&m).unwrap();
    d.iter().map(|v| v * v).sum()
}

#[test]
fn steady_detail_energy_is_small_next_to_capacitor_switching() {
    let fs = 20_000.0;
    let cfg = DatasetConfig {
        synth: SynthConfig::noiseless(),
        ..DatasetConfig::new(0, fs)
    };
    let steady = cfg.synth.steady(fs, 0).unwrap();
    let start = (0.05 * fs) as usize;
    let steady_window = window_at(&steady, start).unwrap();
    for e in plan_dataset(&cfg).unwrap().iter().filter(|e| e.spec.class == EventClass::CapacitorSwitching) {
        let rec = e.synthesize(&cfg).unwrap();
        let w = extract_window(&rec, DEFAULT_JITTER_S).unwrap();
        for bus in BusId::MONITORED {
            let ratio = detail_energy(&steady_window, bus) / detail_energy(&w, bus);
            assert!(ratio < 0.1, "event {} bus {bus}: {ratio}", e.index);
        }
    }
}

#[test]
fn class_mean_features_are_pairwise_distinct() {
    let cfg = DatasetConfig::new(5, 10_000.0);
    let plan = plan_dataset(&cfg).unwrap();
    let mut sums = vec![vec![0.0; 3 * 41]; 4];
    let mut counts = [0usize; 4];
    for e in plan.iter().step_by(3) {
        let rec = e.synthesize(&cfg).unwrap();
        let fm = featurize(&extract_window(&rec, DEFAULT_JITTER_S).unwrap(), &BusId::MONITORED).unwrap();
        assert!(fm.values().iter().all(|v| (0.0..=1.0).contains(v)));
        let c = e.spec.class.index();
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(fm.values()) {
            *s += v;
        }
    }
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(counts)
        .map(|(s, n)| s.iter().map(|v| v / n as f64).collect())
        .collect();
    for i in 0..4 {
        for j in i + 1..4 {
            let d: f64 = means[i].iter().zip(&means[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(d > 0.1, "classes {i} and {j}: {d}");
        }
    }
}
