//! Dataset directories: `manifest.json` plus one CSV per record under
//! `waveforms/`.
//!
//! A CSV holds a header `t,632_va,632_vb,632_vc,671_va,...` (buses ascending)
//! and one row per sample. Values use the shortest decimal form that parses
//! back to the same `f64`, so a saved dataset reloads bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use swec_core::synthgrid::{
    plan_dataset, sample_count, BusChannels, Dataset, DatasetConfig, EventGrid, SynthConfig, F0,
};
use swec_core::{BusId, EventClass, WaveformRecord};

use crate::error::{LabError, LabResult, StageExt};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";
pub const WAVEFORM_DIR: &str = "waveforms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub fs: f64,
    pub f0: f64,
    pub seed: u64,
    pub counts: [usize; 4],
    pub duration_s: f64,
    pub snr_db: Option<f64>,
    pub samples_per_record: usize,
    pub buses: Vec<BusId>,
    pub grid: EventGrid,
    pub events: Vec<ManifestEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEvent {
    pub index: usize,
    pub class: EventClass,
    pub seed: u64,
    pub file: String,
}

pub fn waveform_file(index: usize) -> String {
    format!("{WAVEFORM_DIR}/evt_{index}.csv")
}

fn csv_header(buses: &[BusId]) -> String {
    let mut h = String::from("t");
    for b in buses {
        for p in ["va", "vb", "vc"] {
            write!(h, ",{b}_{p}").expect("string write");
        }
    }
    h
}

fn record_csv(record: &WaveformRecord) -> String {
    let mut out = csv_header(&record.buses.iter().map(|c| c.bus).collect::<Vec<_>>());
    out.push('\n');
    for i in 0..record.len() {
        write!(out, "{}", i as f64 / record.fs).expect("string write");
        for ch in &record.buses {
            for p in &ch.phases {
                write!(out, ",{}", p[i]).expect("string write");
            }
        }
        out.push('\n');
    }
    out
}

pub fn save_dataset(dataset: &Dataset, dir: &Path) -> LabResult<DatasetManifest> {
    let cfg = &dataset.config;
    let wave_dir = dir.join(WAVEFORM_DIR);
    fs::create_dir_all(&wave_dir).map_err(|e| LabError::io(&wave_dir, e))?;
    let mut events = Vec::with_capacity(dataset.records.len());
    for (index, r) in dataset.records.iter().enumerate() {
        let spec = r
            .spec
            .ok_or_else(|| LabError::Config(format!("record {index} carries no event")))?;
        events.push(ManifestEvent {
            index,
            class: spec.class,
            seed: r.seed,
            file: waveform_file(index),
        });
    }
    let buses = dataset
        .records
        .first()
        .map(|r| r.buses.iter().map(|c| c.bus).collect())
        .unwrap_or_else(|| BusId::MONITORED.to_vec());
    let manifest = DatasetManifest {
        schema_version: SCHEMA_VERSION,
        fs: cfg.fs,
        f0: F0,
        seed: cfg.seed,
        counts: dataset.counts(),
        duration_s: cfg.synth.duration,
        snr_db: cfg.synth.snr_db,
        samples_per_record: sample_count(cfg.fs, cfg.synth.duration),
        buses,
        grid: cfg.grid.clone(),
        events,
    };
    dataset
        .records
        .par_iter()
        .zip(&manifest.events)
        .try_for_each(|(r, e)| {
            let path = dir.join(&e.file);
            fs::write(&path, record_csv(r)).map_err(|err| LabError::io(&path, err))
        })?;
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| LabError::io(&path, e))?;
    Ok(manifest)
}

pub fn load_manifest(dir: &Path) -> LabResult<DatasetManifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)
        .map_err(|e| LabError::format(&path, format!("line {}: {e}", e.line())))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(LabError::format(
            &path,
            format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                manifest.schema_version
            ),
        ));
    }
    if manifest.f0 != F0 {
        return Err(LabError::format(
            &path,
            format!("f0 {} Hz (expected {F0})", manifest.f0),
        ));
    }
    Ok(manifest)
}

/// Reads a dataset directory. Event parameters are re-derived from the grid
/// in the manifest and checked against the listed classes and seeds.
pub fn load_dataset(dir: &Path) -> LabResult<Dataset> {
    let manifest = load_manifest(dir)?;
    let mpath = dir.join(MANIFEST);
    let config = DatasetConfig {
        seed: manifest.seed,
        fs: manifest.fs,
        synth: SynthConfig {
            snr_db: manifest.snr_db,
            duration: manifest.duration_s,
        },
        grid: manifest.grid.clone(),
    };
    let plan = plan_dataset(&config).stage("load")?;
    if plan.len() != manifest.events.len() {
        return Err(LabError::format(
            &mpath,
            format!(
                "{} events listed, grid yields {}",
                manifest.events.len(),
                plan.len()
            ),
        ));
    }
    for (p, e) in plan.iter().zip(&manifest.events) {
        if e.index != p.index || e.class != p.spec.class || e.seed != p.seed {
            return Err(LabError::format(
                &mpath,
                format!("event {} does not match the grid and seed", e.index),
            ));
        }
    }
    let header = csv_header(&manifest.buses);
    let expected_rows = sample_count(manifest.fs, manifest.duration_s);
    if manifest.samples_per_record != expected_rows {
        return Err(LabError::format(
            &mpath,
            format!(
                "{} samples per record, expected {expected_rows}",
                manifest.samples_per_record
            ),
        ));
    }
    let records = plan
        .par_iter()
        .zip(&manifest.events)
        .map(|(p, e)| {
            let path = dir.join(&e.file);
            let text = fs::read_to_string(&path).map_err(|err| LabError::io(&path, err))?;
            let buses = parse_record_csv(
                &text,
                &header,
                &manifest.buses,
                manifest.fs,
                expected_rows,
                &path,
            )?;
            Ok(WaveformRecord {
                spec: Some(p.spec),
                fs: manifest.fs,
                duration: manifest.duration_s,
                seed: p.seed,
                buses,
            })
        })
        .collect::<LabResult<Vec<_>>>()?;
    Ok(Dataset { config, records })
}

fn parse_record_csv(
    text: &str,
    header: &str,
    buses: &[BusId],
    fs: f64,
    rows: usize,
    path: &Path,
) -> LabResult<Vec<BusChannels>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header => {}
        other => {
            return Err(LabError::format(
                path,
                format!(
                    "line 1: header {:?}, expected {header:?}",
                    other.unwrap_or("")
                ),
            ))
        }
    }
    let mut channels: Vec<BusChannels> = buses
        .iter()
        .map(|&bus| BusChannels {
            bus,
            phases: std::array::from_fn(|_| Vec::with_capacity(rows)),
        })
        .collect();
    let width = 1 + 3 * buses.len();
    let mut i = 0;
    for (n, line) in lines.enumerate() {
        let lineno = n + 2;
        let fail = |detail: String| LabError::format(path, format!("line {lineno}: {detail}"));
        let mut values = Vec::with_capacity(width);
        for field in line.split(',') {
            let v: f64 = field
                .parse()
                .map_err(|_| fail(format!("`{field}` is not a number")))?;
            values.push(v);
        }
        if values.len() != width {
            return Err(fail(format!("{} fields, expected {width}", values.len())));
        }
        if values[0] != i as f64 / fs {
            return Err(fail(format!("time {} out of sequence", values[0])));
        }
        for (b, ch) in channels.iter_mut().enumerate() {
            for (p, phase) in ch.phases.iter_mut().enumerate() {
                phase.push(values[1 + 3 * b + p]);
            }
        }
        i += 1;
    }
    if i != rows {
        return Err(LabError::format(
            path,
            format!("{i} samples, expected {rows}"),
        ));
    }
    Ok(channels)
}
