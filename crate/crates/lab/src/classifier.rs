//! The four methods behind one interface: train on feature matrices,
//! predict a class for a feature matrix.

use swec_core::baselines::{
    energy_features, train_autoencoder_clf, train_svm_ovr, train_tmlp, AutoencoderClassifier,
    LinearOvrSvm, TaperedMlp,
};
use swec_core::tinycnn::{fit, Example};
use swec_core::{CnnArch, CnnModel, EventClass, FeatureMatrix};

use crate::config::{ExperimentConfig, Method};
use crate::error::{LabError, LabResult, StageExt};

/// Height (buses) and width (coefficients per bus) of a feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputShape {
    pub height: usize,
    pub width: usize,
}

impl InputShape {
    pub fn of(fm: &FeatureMatrix) -> Self {
        InputShape {
            height: fm.height(),
            width: fm.width(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Cnn(CnnModel),
    Svm {
        model: LinearOvrSvm,
        input: InputShape,
        intervals: usize,
    },
    Tmlp {
        model: TaperedMlp,
        input: InputShape,
    },
    Autoencoder {
        model: AutoencoderClassifier,
        input: InputShape,
        intervals: usize,
    },
}

impl Classifier {
    pub fn method(&self) -> Method {
        match self {
            Classifier::Cnn(_) => Method::Cnn,
            Classifier::Svm { .. } => Method::Svm,
            Classifier::Tmlp { .. } => Method::Tmlp,
            Classifier::Autoencoder { .. } => Method::Autoencoder,
        }
    }

    pub fn input(&self) -> InputShape {
        match self {
            Classifier::Cnn(m) => InputShape {
                height: m.arch.input_h,
                width: m.arch.input_w,
            },
            Classifier::Svm { input, .. }
            | Classifier::Tmlp { input, .. }
            | Classifier::Autoencoder { input, .. } => *input,
        }
    }

    pub fn predict(&self, fm: &FeatureMatrix) -> LabResult<EventClass> {
        let shape = InputShape::of(fm);
        if shape != self.input() {
            return Err(LabError::Config(format!(
                "{} model expects {}x{} inputs, got {}x{}",
                self.method(),
                self.input().height,
                self.input().width,
                shape.height,
                shape.width
            )));
        }
        let predicted = match self {
            Classifier::Cnn(m) => m.predict(fm),
            Classifier::Svm {
                model, intervals, ..
            } => energy_features(fm, *intervals).and_then(|x| model.predict(&x)),
            Classifier::Tmlp { model, .. } => model.predict(fm.values()),
            Classifier::Autoencoder {
                model, intervals, ..
            } => energy_features(fm, *intervals).and_then(|x| model.predict(&x)),
        };
        predicted.stage("predict")
    }
}

/// Trains `method` on `inputs` with the settings of `cfg`.
pub fn train_classifier(
    method: Method,
    cfg: &ExperimentConfig,
    inputs: &[&FeatureMatrix],
    labels: &[EventClass],
    seed: u64,
) -> LabResult<Classifier> {
    let first = inputs
        .first()
        .ok_or_else(|| LabError::Config("no training examples".into()))?;
    let input = InputShape::of(first);
    let energy = || -> LabResult<Vec<Vec<f64>>> {
        inputs
            .iter()
            .map(|fm| energy_features(fm, cfg.energy_intervals))
            .collect::<swec_core::Result<_>>()
            .stage("features")
    };
    Ok(match method {
        Method::Cnn => {
            let arch = CnnArch::for_input(input.height, input.width).stage("train")?;
            let data: Vec<Example> = inputs.iter().copied().zip(labels.iter().copied()).collect();
            Classifier::Cnn(
                fit(arch, &data, &cfg.cnn.train_config(seed))
                    .stage("train")?
                    .model,
            )
        }
        Method::Svm => Classifier::Svm {
            model: train_svm_ovr(&energy()?, labels, &cfg.svm, seed).stage("train")?,
            input,
            intervals: cfg.energy_intervals,
        },
        Method::Tmlp => {
            let flat: Vec<Vec<f64>> = inputs.iter().map(|fm| fm.values().to_vec()).collect();
            Classifier::Tmlp {
                model: train_tmlp(&flat, labels, &cfg.tmlp, seed)
                    .stage("train")?
                    .model,
                input,
            }
        }
        Method::Autoencoder => Classifier::Autoencoder {
            model: train_autoencoder_clf(&energy()?, labels, &cfg.autoencoder, seed)
                .stage("train")?
                .model,
            input,
            intervals: cfg.energy_intervals,
        },
    })
}
