//! Comparison classifiers: a linear one-vs-rest SVM and an autoencoder with a
//! softmax head, both on interval energy features, and a tapered MLP on the
//! flattened feature matrix.

mod autoencoder;
mod energy;
mod mlp;
mod standardize;
mod svm;
mod tmlp;

pub use autoencoder::{train_autoencoder_clf, AutoencoderClassifier, AutoencoderConfig, TrainedAutoencoder};
pub use energy::{energy_features, DEFAULT_INTERVALS, STATS_PER_INTERVAL};
pub use mlp::{train_mlp, Activation, Dense, Mlp, Objective, SgdConfig};
pub use standardize::Standardizer;
pub use svm::{train_svm_ovr, LinearOvrSvm, SvmConfig};
pub use tmlp::{train_tmlp, TaperedMlp, TmlpConfig, TrainedTmlp};
