//! Experiment configuration: one JSON document, every key optional.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use swec_core::baselines::{AutoencoderConfig, SvmConfig, TmlpConfig, DEFAULT_INTERVALS};
use swec_core::synthgrid::{
    DatasetConfig, EventGrid, SynthConfig, DEFAULT_DURATION, DEFAULT_JITTER_S, DEFAULT_SNR_DB,
};
use swec_core::{BusId, TrainConfig};

use crate::error::{LabError, LabResult};

/// CNN step size used by the experiments. The trainer's own default is
/// 1e-4, which does not converge in 50 epochs on the synthetic data.
pub const EXPERIMENT_CNN_LEARNING_RATE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Autoencoder,
    Svm,
    Tmlp,
    Cnn,
}

impl Method {
    /// Table order.
    pub const ALL: [Method; 4] = [Method::Autoencoder, Method::Svm, Method::Tmlp, Method::Cnn];

    pub fn name(self) -> &'static str {
        match self {
            Method::Autoencoder => "autoencoder",
            Method::Svm => "svm",
            Method::Tmlp => "tmlp",
            Method::Cnn => "cnn",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = LabError;
    fn from_str(s: &str) -> LabResult<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown method `{s}`")))
    }
}

/// CNN settings left unset fall back to [`TrainConfig::default`], except the
/// learning rate, which falls back to [`EXPERIMENT_CNN_LEARNING_RATE`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnnOverrides {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub momentum: Option<f64>,
    pub init_std: Option<f64>,
}

impl CnnOverrides {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let base = TrainConfig::default();
        TrainConfig {
            epochs: self.epochs.unwrap_or(base.epochs),
            batch_size: self.batch_size.unwrap_or(base.batch_size),
            learning_rate: self.learning_rate.unwrap_or(EXPERIMENT_CNN_LEARNING_RATE),
            momentum: self.momentum.unwrap_or(base.momentum),
            init_std: self.init_std.unwrap_or(base.init_std),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Rates of the sampling-rate sweep, Hz.
    pub fs_list: Vec<f64>,
    /// Rate of single runs, the placement study and the method comparison.
    pub fs: f64,
    /// Bus sets of the placement study.
    pub bus_subsets: Vec<Vec<BusId>>,
    /// Buses of single runs, the rate sweep and the method comparison.
    pub buses: Vec<BusId>,
    pub train_fraction: f64,
    /// `null` generates noiseless records.
    pub snr_db: Option<f64>,
    pub duration_s: f64,
    pub max_jitter_s: f64,
    pub grid: EventGrid,
    pub methods: Vec<Method>,
    /// Split and training seeds per table cell; accuracies are averaged.
    pub repeats: usize,
    pub energy_intervals: usize,
    pub cnn: CnnOverrides,
    pub svm: SvmConfig,
    pub tmlp: TmlpConfig,
    pub autoencoder: AutoencoderConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let m = BusId::MONITORED;
        ExperimentConfig {
            seed: 0,
            fs_list: vec![1250.0, 2500.0, 5000.0, 10000.0, 20000.0],
            fs: 20000.0,
            bus_subsets: vec![
                vec![m[0]],
                vec![m[1]],
                vec![m[2]],
                vec![m[0], m[1]],
                vec![m[0], m[2]],
                vec![m[1], m[2]],
                m.to_vec(),
            ],
            buses: m.to_vec(),
            train_fraction: 0.8,
            snr_db: Some(DEFAULT_SNR_DB),
            duration_s: DEFAULT_DURATION,
            max_jitter_s: DEFAULT_JITTER_S,
            grid: EventGrid::default(),
            methods: Method::ALL.to_vec(),
            repeats: 3,
            energy_intervals: DEFAULT_INTERVALS,
            cnn: CnnOverrides::default(),
            svm: SvmConfig::default(),
            tmlp: TmlpConfig::default(),
            autoencoder: AutoencoderConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(format!("config: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every documented constraint and sorts bus lists ascending.
    pub fn validate(mut self) -> LabResult<Self> {
        let bad = |msg: String| Err(LabError::Config(msg));
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction {} must lie in (0, 1)",
                self.train_fraction
            ));
        }
        if self.fs_list.is_empty() {
            return bad("fs_list is empty".into());
        }
        for &fs in self.fs_list.iter().chain([&self.fs]) {
            if !(fs.is_finite() && fs >= 1000.0) {
                return bad(format!("sampling rate {fs} must be at least 1000 Hz"));
            }
        }
        for (i, fs) in self.fs_list.iter().enumerate() {
            if self.fs_list[..i].contains(fs) {
                return bad(format!("fs_list repeats {fs}"));
            }
        }
        self.buses = normalize_buses(&self.buses, "buses")?;
        if self.bus_subsets.is_empty() {
            return bad("bus_subsets is empty".into());
        }
        let mut seen: Vec<Vec<BusId>> = Vec::new();
        for subset in &mut self.bus_subsets {
            *subset = normalize_buses(subset, "bus_subsets")?;
            if seen.contains(subset) {
                return bad(format!("bus subset {} listed twice", bus_label(subset)));
            }
            seen.push(subset.clone());
        }
        if self.methods.is_empty() {
            return bad("methods is empty".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return bad(format!("method {m} listed twice"));
            }
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.energy_intervals == 0 {
            return bad("energy_intervals must be at least 1".into());
        }
        if !(self.max_jitter_s.is_finite() && self.max_jitter_s >= 0.0) {
            return bad(format!(
                "max_jitter_s {} must be non-negative",
                self.max_jitter_s
            ));
        }
        let core = |r: swec_core::Result<()>| r.map_err(|e| LabError::Config(e.to_string()));
        core(self.cnn.train_config(0).validate())?;
        core(self.svm.validate())?;
        core(self.tmlp.sgd.validate())?;
        core(self.autoencoder.pretrain.validate())?;
        core(self.autoencoder.head.validate())?;
        core(self.grid.events().map(drop))?;
        Ok(self)
    }

    pub fn dataset_config(&self, fs: f64) -> DatasetConfig {
        DatasetConfig {
            seed: self.seed,
            fs,
            synth: SynthConfig {
                snr_db: self.snr_db,
                duration: self.duration_s,
            },
            grid: self.grid.clone(),
        }
    }
}

fn normalize_buses(buses: &[BusId], key: &str) -> LabResult<Vec<BusId>> {
    if buses.is_empty() {
        return Err(LabError::Config(format!("{key}: empty bus list")));
    }
    let mut out = buses.to_vec();
    out.sort();
    for w in out.windows(2) {
        if w[0] == w[1] {
            return Err(LabError::Config(format!(
                "{key}: bus {} listed twice",
                w[0]
            )));
        }
    }
    if let Some(b) = out.iter().find(|b| !b.is_monitored()) {
        return Err(LabError::Config(format!(
            "{key}: bus {b} has no measurement unit"
        )));
    }
    Ok(out)
}

/// `632+671` style label of a bus set.
pub fn bus_label(buses: &[BusId]) -> String {
    buses
        .iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join("+")
}
