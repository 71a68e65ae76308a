//! Experiment orchestration: dataset synthesis, feature extraction, splits,
//! training and evaluation of table cells, and the run directory layout.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use swec_core::featpipe::featurize;
use swec_core::metrics::{aggregate, confusion_of, MetricsReport};
use swec_core::seed::{self, derive_seed};
use swec_core::split::{split_stratified, SplitIndex};
use swec_core::synthgrid::{extract_window, plan_dataset, Dataset, DatasetConfig};
use swec_core::tinycnn::{grad_check, init_model, GradCheckReport};
use swec_core::{BusId, CnnArch, EventClass, FeatureMatrix};

use crate::classifier::{train_classifier, Classifier};
use crate::config::{bus_label, ExperimentConfig, Method};
use crate::error::{LabError, LabResult, StageExt};
use crate::model_io::save_model;
use crate::report::{confusion_csv, ClassRow, Repeat, ReportTable, RowKey, SummaryRow};

/// Feature matrices of every record at one rate, all monitored buses.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub fs: f64,
    pub labels: Vec<EventClass>,
    pub matrices: Vec<FeatureMatrix>,
}

impl FeatureSet {
    /// Synthesizes the dataset of `cfg` record by record and keeps only the
    /// features.
    pub fn generate(cfg: &DatasetConfig, max_jitter_s: f64) -> LabResult<Self> {
        let plan = plan_dataset(cfg).stage("generate")?;
        let matrices = plan
            .par_iter()
            .map(|e| {
                let record = e.synthesize(cfg).stage("generate")?;
                let window = extract_window(&record, max_jitter_s).stage("window")?;
                featurize(&window, &BusId::MONITORED).stage("features")
            })
            .collect::<LabResult<Vec<_>>>()?;
        Ok(FeatureSet {
            fs: cfg.fs,
            labels: plan.iter().map(|e| e.spec.class).collect(),
            matrices,
        })
    }

    pub fn from_dataset(dataset: &Dataset, max_jitter_s: f64) -> LabResult<Self> {
        let matrices = dataset
            .records
            .par_iter()
            .map(|record| {
                let window = extract_window(record, max_jitter_s).stage("window")?;
                featurize(&window, &BusId::MONITORED).stage("features")
            })
            .collect::<LabResult<Vec<_>>>()?;
        Ok(FeatureSet {
            fs: dataset.config.fs,
            labels: dataset.labels(),
            matrices,
        })
    }

    /// Rows of `buses` only.
    pub fn select(&self, buses: &[BusId]) -> LabResult<Vec<FeatureMatrix>> {
        self.matrices
            .par_iter()
            .map(|m| m.select(buses))
            .collect::<swec_core::Result<_>>()
            .stage("features")
    }
}

/// [`swec_core::synthgrid::build_dataset`] with records synthesized in
/// parallel.
pub fn synthesize_dataset(cfg: &DatasetConfig) -> LabResult<Dataset> {
    let records = plan_dataset(cfg)
        .stage("generate")?
        .par_iter()
        .map(|e| e.synthesize(cfg))
        .collect::<swec_core::Result<Vec<_>>>()
        .stage("generate")?;
    Ok(Dataset {
        config: cfg.clone(),
        records,
    })
}

/// Hex SHA-256 prefix of the train and test index lists.
pub fn split_fingerprint(split: &SplitIndex) -> String {
    let mut h = Sha256::new();
    for (tag, idx) in [("train", &split.train), ("test", &split.test)] {
        h.update(tag.as_bytes());
        for i in idx {
            h.update((*i as u64).to_le_bytes());
        }
    }
    h.finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Index of the seed stream reserved for repeats, far from record indices.
const REPEAT_BRANCH: u64 = u64::MAX;

/// Split and training seed of repeat `k`. Depends only on the global seed and
/// `k`, so the first repeats agree whatever the repeat count.
pub fn repeat_seed(global: u64, k: usize) -> u64 {
    derive_seed(derive_seed(global, REPEAT_BRANCH), k as u64)
}

/// Trains `method` on the training part of `split` and evaluates it on the
/// test part.
pub fn evaluate_split(
    cfg: &ExperimentConfig,
    method: Method,
    inputs: &[FeatureMatrix],
    labels: &[EventClass],
    split: &SplitIndex,
    seed: u64,
) -> LabResult<(Classifier, MetricsReport)> {
    let train_x: Vec<&FeatureMatrix> = split.train.iter().map(|&i| &inputs[i]).collect();
    let train_y: Vec<EventClass> = split.train.iter().map(|&i| labels[i]).collect();
    let model = train_classifier(method, cfg, &train_x, &train_y, seed)?;
    let report = evaluate(&model, inputs, labels, &split.test)?;
    Ok((model, report))
}

/// Metrics of `model` on the records at `indices`.
pub fn evaluate(
    model: &Classifier,
    inputs: &[FeatureMatrix],
    labels: &[EventClass],
    indices: &[usize],
) -> LabResult<MetricsReport> {
    let preds = indices
        .iter()
        .map(|&i| model.predict(&inputs[i]))
        .collect::<LabResult<Vec<_>>>()?;
    let targets: Vec<EventClass> = indices.iter().map(|&i| labels[i]).collect();
    let cm = confusion_of(&preds, &targets).stage("evaluate")?;
    aggregate(&cm).stage("evaluate")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub method: Method,
    pub fs: f64,
    pub buses: Vec<BusId>,
    pub repeat: usize,
}

impl CellSpec {
    /// File stem of the cell's model and confusion matrix.
    pub fn label(&self) -> String {
        format!(
            "{}_{}hz_{}_r{}",
            self.method,
            self.fs,
            bus_label(&self.buses),
            self.repeat
        )
    }

    fn cache_key(&self) -> (Method, u64, Vec<BusId>, usize) {
        (
            self.method,
            self.fs.to_bits(),
            self.buses.clone(),
            self.repeat,
        )
    }

    fn row_key(&self) -> RowKey {
        RowKey {
            method: self.method,
            fs: self.fs,
            buses: self.buses.clone(),
            repeat: Repeat::Index(self.repeat),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub spec: CellSpec,
    pub seed: u64,
    pub split: String,
    pub report: MetricsReport,
    pub model: Classifier,
}

type CellCacheKey = (Method, u64, Vec<BusId>, usize);

/// Runs table cells for one validated configuration, memoizing feature sets
/// per rate and results per cell.
pub struct Lab {
    cfg: ExperimentConfig,
    features: Mutex<HashMap<u64, Arc<FeatureSet>>>,
    cells: Mutex<HashMap<CellCacheKey, Arc<CellResult>>>,
}

impl Lab {
    pub fn new(cfg: ExperimentConfig) -> LabResult<Self> {
        Ok(Lab {
            cfg: cfg.validate()?,
            features: Mutex::new(HashMap::new()),
            cells: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn features(&self, fs: f64) -> LabResult<Arc<FeatureSet>> {
        if let Some(f) = self
            .features
            .lock()
            .expect("feature cache")
            .get(&fs.to_bits())
        {
            return Ok(f.clone());
        }
        let set = Arc::new(FeatureSet::generate(
            &self.cfg.dataset_config(fs),
            self.cfg.max_jitter_s,
        )?);
        self.features
            .lock()
            .expect("feature cache")
            .insert(fs.to_bits(), set.clone());
        Ok(set)
    }

    /// Results of `specs` in the given order. Feature sets are built first,
    /// then the cells run in parallel.
    pub fn run_cells(&self, specs: &[CellSpec]) -> LabResult<Vec<Arc<CellResult>>> {
        let mut rates: Vec<f64> = Vec::new();
        for s in specs {
            if !rates.contains(&s.fs) {
                rates.push(s.fs);
            }
        }
        for fs in rates {
            self.features(fs)?;
        }
        specs.par_iter().map(|s| self.cell(s)).collect()
    }

    pub fn cell(&self, spec: &CellSpec) -> LabResult<Arc<CellResult>> {
        if let Some(r) = self
            .cells
            .lock()
            .expect("cell cache")
            .get(&spec.cache_key())
        {
            return Ok(r.clone());
        }
        let features = self.features(spec.fs)?;
        let inputs = features.select(&spec.buses)?;
        let seed = repeat_seed(self.cfg.seed, spec.repeat);
        let split =
            split_stratified(&features.labels, self.cfg.train_fraction, seed).stage("split")?;
        let (model, report) = evaluate_split(
            &self.cfg,
            spec.method,
            &inputs,
            &features.labels,
            &split,
            seed,
        )?;
        let result = Arc::new(CellResult {
            spec: spec.clone(),
            seed,
            split: split_fingerprint(&split),
            report,
            model,
        });
        self.cells
            .lock()
            .expect("cell cache")
            .insert(spec.cache_key(), result.clone());
        Ok(result)
    }

    fn repeats_of(&self, method: Method, fs: f64, buses: &[BusId]) -> Vec<CellSpec> {
        (0..self.cfg.repeats)
            .map(|repeat| CellSpec {
                method,
                fs,
                buses: buses.to_vec(),
                repeat,
            })
            .collect()
    }

    /// First-repeat metrics of one method at one rate and bus set.
    pub fn run_pipeline(
        &self,
        fs: f64,
        buses: &[BusId],
        method: Method,
    ) -> LabResult<MetricsReport> {
        let mut buses = buses.to_vec();
        buses.sort();
        let spec = CellSpec {
            method,
            fs,
            buses,
            repeat: 0,
        };
        Ok(self.cell(&spec)?.report.clone())
    }

    /// CNN on the configured buses at every rate of `fs_list`, ascending.
    pub fn sweep_sampling_rate(&self) -> LabResult<Experiment> {
        let mut rates = self.cfg.fs_list.clone();
        if rates.len() < 2 {
            return Err(LabError::Config(
                "the rate sweep needs at least two rates".into(),
            ));
        }
        rates.sort_by(f64::total_cmp);
        let specs: Vec<CellSpec> = rates
            .iter()
            .flat_map(|&fs| self.repeats_of(Method::Cnn, fs, &self.cfg.buses))
            .collect();
        self.experiment("sweep_fs", specs)
    }

    /// CNN at `fs` on every configured bus subset.
    pub fn sweep_placement(&self) -> LabResult<Experiment> {
        let specs: Vec<CellSpec> = self
            .cfg
            .bus_subsets
            .iter()
            .flat_map(|b| self.repeats_of(Method::Cnn, self.cfg.fs, b))
            .collect();
        self.experiment("sweep_placement", specs)
    }

    /// Every configured method on identical splits and features.
    pub fn compare_methods(&self) -> LabResult<Experiment> {
        if self.cfg.methods.len() < 2 {
            return Err(LabError::Config(
                "the comparison needs at least two methods".into(),
            ));
        }
        let specs: Vec<CellSpec> = self
            .cfg
            .methods
            .iter()
            .flat_map(|&m| self.repeats_of(m, self.cfg.fs, &self.cfg.buses))
            .collect();
        self.experiment("compare", specs)
    }

    fn experiment(&self, name: &'static str, specs: Vec<CellSpec>) -> LabResult<Experiment> {
        let cells = self.run_cells(&specs)?;
        Ok(Experiment {
            name,
            config: self.cfg.clone(),
            cells,
        })
    }
}

/// Results of one experiment, cells grouped by (method, rate, buses) with
/// repeats consecutive.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: &'static str,
    pub config: ExperimentConfig,
    pub cells: Vec<Arc<CellResult>>,
}

/// Mean accuracy of one group of repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMean {
    pub method: Method,
    pub fs: f64,
    pub buses: Vec<BusId>,
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

impl Experiment {
    fn groups(&self) -> Vec<&[Arc<CellResult>]> {
        self.cells
            .chunk_by(|a, b| {
                a.spec.method == b.spec.method
                    && a.spec.fs == b.spec.fs
                    && a.spec.buses == b.spec.buses
            })
            .collect()
    }

    pub fn means(&self) -> Vec<GroupMean> {
        self.groups()
            .into_iter()
            .map(|g| {
                let accuracies: Vec<f64> = g.iter().map(|c| c.report.accuracy).collect();
                GroupMean {
                    method: g[0].spec.method,
                    fs: g[0].spec.fs,
                    buses: g[0].spec.buses.clone(),
                    mean_accuracy: accuracies.iter().sum::<f64>() / accuracies.len() as f64,
                    accuracies,
                }
            })
            .collect()
    }

    pub fn table(&self) -> ReportTable {
        let mut table = ReportTable::default();
        for group in self.groups() {
            for c in group {
                let key = c.spec.row_key();
                table.summary.push(SummaryRow::from_report(
                    key.clone(),
                    c.seed,
                    &c.split,
                    &c.report,
                ));
                table.classes.extend(ClassRow::all(&key, &c.report));
            }
            let mut key = group[0].spec.row_key();
            key.repeat = Repeat::Mean;
            let reports: Vec<&MetricsReport> = group.iter().map(|c| &c.report).collect();
            table.summary.push(SummaryRow::mean(key, &reports));
        }
        table
    }

    /// Writes `manifest.json`, `reports/<name>.csv`, and one model and one
    /// confusion matrix per cell under `dir`.
    pub fn write_run(&self, dir: &Path) -> LabResult<()> {
        for sub in ["reports", "models", "confusion"] {
            let d = dir.join(sub);
            fs::create_dir_all(&d).map_err(|e| LabError::io(&d, e))?;
        }
        let mut entries = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let label = c.spec.label();
            let model = format!("models/{label}.bin");
            let confusion = format!("confusion/{label}.csv");
            save_model(&c.model, &dir.join(&model))?;
            write_file(&dir.join(&confusion), &confusion_csv(&c.report.confusion))?;
            entries.push(CellEntry {
                method: c.spec.method,
                fs_hz: c.spec.fs,
                buses: c.spec.buses.clone(),
                repeat: c.spec.repeat,
                seed: c.seed,
                split: c.split.clone(),
                model,
                confusion,
            });
        }
        let report = format!("reports/{}.csv", self.name);
        write_file(&dir.join(&report), &self.table().to_csv())?;
        let manifest = RunManifest {
            schema_version: 1,
            tool: concat!("swec ", env!("CARGO_PKG_VERSION")),
            experiment: self.name,
            config: &self.config,
            report,
            cells: entries,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_file(&dir.join("manifest.json"), &(json + "\n"))
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    schema_version: u32,
    tool: &'static str,
    experiment: &'static str,
    config: &'a ExperimentConfig,
    report: String,
    cells: Vec<CellEntry>,
}

#[derive(Serialize)]
struct CellEntry {
    method: Method,
    fs_hz: f64,
    buses: Vec<BusId>,
    repeat: usize,
    seed: u64,
    split: String,
    model: String,
    confusion: String,
}

pub fn write_file(path: &Path, text: &str) -> LabResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

/// Finite-difference check of seeded random CNNs on seeded random 3x166
/// inputs, one labeled input per pair.
pub fn cnn_gradient_check(seed: u64, pairs: usize, h: f64) -> LabResult<GradCheckReport> {
    let arch = CnnArch::for_input(3, 166).stage("gradcheck")?;
    let mut total: Option<GradCheckReport> = None;
    for k in 0..pairs {
        let s = derive_seed(seed, k as u64);
        let model = init_model(arch, s).stage("gradcheck")?;
        let mut rng = seed::rng(s, seed::stream::EVENT);
        let values = (0..arch.input_h * arch.input_w)
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        let x =
            FeatureMatrix::from_values(arch.input_h, arch.input_w, values).stage("gradcheck")?;
        let label =
            EventClass::from_index(rng.random_range(0..EventClass::COUNT)).expect("class index");
        let report = grad_check(&model, &[(&x, label)], h).stage("gradcheck")?;
        match total.as_mut() {
            Some(t) => t.merge(&report),
            None => total = Some(report),
        }
    }
    total.ok_or_else(|| LabError::Config("at least one pair is needed".into()))
}

/// Reads `SWEC_THREADS` and sizes the global thread pool; unset leaves the
/// pool at its default.
pub fn init_thread_pool() -> LabResult<()> {
    let Ok(text) = std::env::var("SWEC_THREADS") else {
        return Ok(());
    };
    let n: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        LabError::Config(format!("SWEC_THREADS={text:?} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))
}
