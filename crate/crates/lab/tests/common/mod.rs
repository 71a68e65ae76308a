#![allow(dead_code)]

use swec_lab::ExperimentConfig;

/// 46 events (8, 12, 20, 6) instead of 600.
pub const SMALL_GRID: &str = r#"{
    "counts": [8, 12, 20, 6],
    "capacitor": {"angles": 1},
    "transformer": {"angles": 1},
    "fault": {"locations": [632], "angles": 1},
    "hif": {"locations": [671], "angles": 1}
}"#;

/// Small grid, low rate and few epochs: every method trains in well under a
/// second.
pub fn small_config_json() -> String {
    format!(
        r#"{{
    "seed": 11,
    "fs": 5000,
    "fs_list": [5000, 1250],
    "repeats": 2,
    "grid": {SMALL_GRID},
    "cnn": {{"epochs": 5}},
    "svm": {{"epochs": 20}},
    "tmlp": {{"sgd": {{"epochs": 5}}}},
    "autoencoder": {{"pretrain": {{"epochs": 5}}, "head": {{"epochs": 5}}}}
}}"#
    )
}

pub fn small_config() -> ExperimentConfig {
    ExperimentConfig::from_json(&small_config_json())
        .unwrap()
        .validate()
        .unwrap()
}
