//! Files, experiments and the command line around `swec-core`.
//!
//! - [`config`]: the experiment JSON document,
//! - [`dataset_io`]: dataset directories of CSV waveforms,
//! - [`model_io`]: binary model files,
//! - [`report`]: metrics and confusion CSV,
//! - [`harness`]: table cells, sweeps, comparisons and run directories.

pub mod classifier;
pub mod config;
pub mod dataset_io;
pub mod error;
pub mod harness;
pub mod model_io;
pub mod report;

pub use classifier::{Classifier, InputShape};
pub use config::{ExperimentConfig, Method};
pub use error::{LabError, LabResult};
pub use harness::{Experiment, Lab};
