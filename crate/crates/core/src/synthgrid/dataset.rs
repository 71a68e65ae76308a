use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::models::{CAPACITOR_SIZES, HIF_DRAWS, TAP_POSITIONS};
use super::record::{SynthConfig, WaveformRecord};
use super::types::{BusId, ClassParams, EventClass, EventSpec, FaultKind};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Per-class instance counts of the default grid.
pub const DEFAULT_COUNTS: [usize; 4] = [64, 144, 320, 72];

/// Evenly spaced inception angles, offset by half a step: `(k + 0.5) * 360 / n`.
pub fn inception_angles(n: u32) -> Vec<f64> {
    (0..n)
        .map(|k| (f64::from(k) + 0.5) * 360.0 / f64::from(n))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CapacitorGrid {
    pub location: BusId,
    pub angles: u32,
    pub sizes: u8,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TransformerGrid {
    pub location: BusId,
    pub angles: u32,
    pub taps: u8,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FaultGrid {
    pub kinds: Vec<FaultKind>,
    pub locations: Vec<BusId>,
    pub resistances_ohm: Vec<f64>,
    pub angles: u32,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct HifGrid {
    pub locations: Vec<BusId>,
    pub angles: u32,
    pub draws: u8,
}

/// Parameter grid of every class together with the declared class counts
/// the grid must reproduce.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EventGrid {
    pub counts: [usize; 4],
    pub capacitor: CapacitorGrid,
    pub transformer: TransformerGrid,
    pub fault: FaultGrid,
    pub hif: HifGrid,
}

impl Default for EventGrid {
    fn default() -> Self {
        EventGrid {
            counts: DEFAULT_COUNTS,
            capacitor: CapacitorGrid {
                location: BusId::B675,
                angles: 8,
                sizes: CAPACITOR_SIZES,
            },
            transformer: TransformerGrid {
                location: BusId::B634,
                angles: 12,
                taps: TAP_POSITIONS,
            },
            fault: FaultGrid {
                kinds: FaultKind::ALL.to_vec(),
                locations: super::types::FAULT_LOCATIONS.to_vec(),
                resistances_ohm: vec![0.0, 2.5, 5.0, 10.0, 20.0],
                angles: 4,
            },
            hif: HifGrid {
                locations: vec![BusId::B634, BusId::B671, BusId::B680],
                angles: 4,
                draws: HIF_DRAWS,
            },
        }
    }
}

macro_rules! default_from_grid {
    ($($ty:ident => $field:ident),*) => {
        $(impl Default for $ty {
            fn default() -> Self {
                EventGrid::default().$field
            }
        })*
    };
}

default_from_grid!(
    CapacitorGrid => capacitor,
    TransformerGrid => transformer,
    FaultGrid => fault,
    HifGrid => hif
);

impl EventGrid {
    /// Instances generated per class.
    pub fn products(&self) -> [usize; 4] {
        let c = &self.capacitor;
        let t = &self.transformer;
        let f = &self.fault;
        let h = &self.hif;
        [
            c.angles as usize * c.sizes as usize,
            t.angles as usize * t.taps as usize,
            f.kinds.len() * f.locations.len() * f.resistances_ohm.len() * f.angles as usize,
            h.locations.len() * h.angles as usize * h.draws as usize,
        ]
    }

    /// Enumerates every event, class by class, checking the declared counts.
    pub fn events(&self) -> Result<Vec<EventSpec>> {
        let products = self.products();
        if products != self.counts {
            return Err(Error::Config(format!(
                "grid yields class counts {products:?} but {:?} were declared",
                self.counts
            )));
        }
        if products.contains(&0) {
            return Err(Error::Config(format!("grid leaves a class empty: {products:?}")));
        }
        let mut out = Vec::with_capacity(products.iter().sum());
        let c = &self.capacitor;
        for angle in inception_angles(c.angles) {
            for size_index in 0..c.sizes {
                let params = ClassParams::Capacitor {
                    size_index,
                    amplitude: 1.0,
                };
                out.push(EventSpec::new(EventClass::CapacitorSwitching, angle, c.location, params)?);
            }
        }
        let t = &self.transformer;
        for angle in inception_angles(t.angles) {
            for tap_index in 0..t.taps {
                let params = ClassParams::Transformer { tap_index };
                out.push(EventSpec::new(
                    EventClass::TransformerEnergization,
                    angle,
                    t.location,
                    params,
                )?);
            }
        }
        let f = &self.fault;
        for &fault in &f.kinds {
            for &location in &f.locations {
                for &resistance_ohm in &f.resistances_ohm {
                    for angle in inception_angles(f.angles) {
                        let params = ClassParams::Fault {
                            fault,
                            resistance_ohm,
                        };
                        out.push(EventSpec::new(EventClass::Fault, angle, location, params)?);
                    }
                }
            }
        }
        let h = &self.hif;
        for &location in &h.locations {
            for angle in inception_angles(h.angles) {
                for draw_index in 0..h.draws {
                    let params = ClassParams::Hif { draw_index };
                    out.push(EventSpec::new(
                        EventClass::HighImpedanceFault,
                        angle,
                        location,
                        params,
                    )?);
                }
            }
        }
        Ok(out)
    }
}

/// Everything needed to regenerate a dataset bit for bit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetConfig {
    pub seed: u64,
    pub fs: f64,
    pub synth: SynthConfig,
    pub grid: EventGrid,
}

impl DatasetConfig {
    pub fn new(seed: u64, fs: f64) -> Self {
        DatasetConfig {
            seed,
            fs,
            synth: SynthConfig::default(),
            grid: EventGrid::default(),
        }
    }
}

/// A record yet to be synthesized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedEvent {
    pub index: usize,
    pub spec: EventSpec,
    pub seed: u64,
}

impl PlannedEvent {
    pub fn synthesize(&self, cfg: &DatasetConfig) -> Result<WaveformRecord> {
        cfg.synth.event(&self.spec, cfg.fs, self.seed)
    }
}

/// Events of `cfg` with their derived per-record seeds.
pub fn plan_dataset(cfg: &DatasetConfig) -> Result<Vec<PlannedEvent>> {
    Ok(cfg
        .grid
        .events()?
        .into_iter()
        .enumerate()
        .map(|(index, spec)| PlannedEvent {
            index,
            spec,
            seed: derive_seed(cfg.seed, index as u64),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: DatasetConfig,
    pub records: Vec<WaveformRecord>,
}

impl Dataset {
    pub fn counts(&self) -> [usize; 4] {
        class_counts(self.records.iter().filter_map(|r| r.spec.map(|s| s.class)))
    }

    pub fn labels(&self) -> Vec<EventClass> {
        self.records
            .iter()
            .map(|r| r.spec.expect("dataset records carry an event").class)
            .collect()
    }
}

pub fn class_counts(labels: impl IntoIterator<Item = EventClass>) -> [usize; 4] {
    let mut counts = [0; 4];
    for c in labels {
        counts[c.index()] += 1;
    }
    counts
}

/// Synthesizes every record of `cfg` sequentially.
pub fn build_dataset(cfg: &DatasetConfig) -> Result<Dataset> {
    let records = plan_dataset(cfg)?
        .iter()
        .map(|e| e.synthesize(cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        config: cfg.clone(),
        records,
    })
}
