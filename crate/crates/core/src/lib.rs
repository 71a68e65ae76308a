//! Event-cause analysis for distribution feeders from synchronized voltage
//! waveforms.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every numerical piece of
//! the pipeline:
//!
//! - [`synthgrid`]: seeded synthetic three-phase events at the monitored buses,
//! - [`featpipe`]: mode-1 transform, level-1 db4 DWT and per-bus peak
//!   normalization into a stacked [`featpipe::FeatureMatrix`],
//! - [`tinycnn`]: the single-convolution-layer classifier with SGD momentum,
//! - [`baselines`]: energy-feature SVM and autoencoder, and a tapered MLP,
//! - [`metrics`]: confusion matrix with per-class and macro/micro metrics,
//! - [`split`]: stratified train/test apportionment.
//!
//! File formats, the experiment harness and the command line live in the
//! `swec-lab` crate.
#![no_std]

extern crate alloc;

pub mod baselines;
pub mod error;
pub mod featpipe;
pub mod metrics;
pub mod seed;
pub mod split;
pub mod synthgrid;
pub mod tinycnn;

pub use error::{Error, Result};
pub use featpipe::FeatureMatrix;
pub use metrics::{ConfusionMatrix, MetricsReport};
pub use synthgrid::{BusId, EventClass, EventSpec, WaveformRecord};
pub use tinycnn::{CnnArch, CnnModel, TrainConfig};
