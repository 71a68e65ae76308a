//! Seeded synthetic events at the monitored buses of the 13-bus feeder.
//!
//! Each record is the balanced 60 Hz steady state of buses 632, 671 and 675
//! plus a class-specific disturbance and white measurement noise. The
//! disturbance is computed on a fine time grid and passed through the
//! measurement unit's sinc^3 decimation filter, so content above the unit's
//! Nyquist rate is suppressed rather than aliased.

mod dataset;
mod models;
mod record;
mod types;
mod window;

pub use dataset::{
    build_dataset, class_counts, inception_angles, plan_dataset, CapacitorGrid, Dataset,
    DatasetConfig, EventGrid, FaultGrid, HifGrid, PlannedEvent, TransformerGrid, DEFAULT_COUNTS,
};
pub use models::{
    attenuation, capacitor_oscillation, fault_resistance_factor, fault_sag_depth, ATTENUATION,
    CAPACITOR_SIZES, HIF_DRAWS, TAP_POSITIONS,
};
pub use record::{
    sample_count, BusChannels, SynthConfig, WaveformRecord, DEFAULT_DURATION, DEFAULT_SNR_DB,
};
pub use types::{
    event_time_for_angle, parse_bus_list, BusId, ClassParams, EventClass, EventSpec, FaultKind,
    F0, FAULT_LOCATIONS, NOMINAL_EVENT_TIME,
};
pub use window::{extract_window, window_at, window_len, Window, DEFAULT_JITTER_S};
