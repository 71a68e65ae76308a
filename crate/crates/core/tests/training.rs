use rand::Rng;
use swec_core::baselines::{
    energy_features, train_autoencoder_clf, train_svm_ovr, train_tmlp, AutoencoderConfig, SgdConfig, SvmConfig,
    TaperedMlp, TmlpConfig,
};
use swec_core::featpipe::{featurize, WtcRow};
use swec_core::seed;
use swec_core::split::split_stratified;
use swec_core::synthgrid::{extract_window, plan_dataset, DatasetConfig, DEFAULT_JITTER_S};
use swec_core::tinycnn::{fit, init_model, sgdm_step, CnnArch, OptimizerState, TrainConfig};
use swec_core::{BusId, EventClass, FeatureMatrix};

const A: EventClass = EventClass::CapacitorSwitching;
const B: EventClass = EventClass::Fault;

/// Two classes that differ in which half of the rows carries energy.
fn toy_matrices(n: usize, h: usize, w: usize) -> Vec<(FeatureMatrix, EventClass)> {
    let mut rng = seed::rng(17, 50);
    (0..n)
        .map(|i| {
            let class = if i % 2 == 0 { A } else { B };
            let values = (0..h * w)
                .map(|k| {
                    let first_half = k % w < w / 2;
                    let lit = first_half == (class == A);
                    if lit {
                        rng.random_range(0.6..1.0)
                    } else {
                        rng.random_range(0.0..0.2)
                    }
                })
                .collect();
            (FeatureMatrix::from_values(h, w, values).unwrap(), class)
        })
        .collect()
}

fn accuracy(preds: &[EventClass], truth: &[EventClass]) -> f64 {
    preds.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / truth.len() as f64
}

/// Every example of a class shares one matrix.
fn class_constant(n: usize, h: usize, w: usize) -> Vec<(FeatureMatrix, EventClass)> {
    let protos = toy_matrices(2, h, w);
    (0..n).map(|i| protos[i % 2].clone()).collect()
}

#[test]
fn cnn_learns_a_separable_toy_set_with_default_settings() {
    let data = class_constant(64, 3, 40);
    let examples: Vec<_> = data.iter().map(|(x, c)| (x, *c)).collect();
    let arch = CnnArch::for_input(3, 40).unwrap();
    let trained = fit(arch, &examples, &TrainConfig::default()).unwrap();
    assert_eq!(trained.loss_trace.len(), 50);
    let preds: Vec<_> = data.iter().map(|(x, _)| trained.model.predict(x).unwrap()).collect();
    let truth: Vec<_> = data.iter().map(|(_, c)| *c).collect();
    assert_eq!(accuracy(&preds, &truth), 1.0);
}

#[test]
fn cnn_training_is_bit_reproducible() {
    let data = toy_matrices(20, 2, 30);
    let examples: Vec<_> = data.iter().map(|(x, c)| (x, *c)).collect();
    let arch = CnnArch::for_input(2, 30).unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        seed: 3,
        ..TrainConfig::default()
    };
    let a = fit(arch, &examples, &cfg).unwrap();
    let b = fit(arch, &examples, &cfg).unwrap();
    assert_eq!(a, b);
    let c = fit(arch, &examples, &TrainConfig { seed: 4, ..cfg }).unwrap();
    assert_ne!(a.model, c.model);
}

#[test]
fn zero_learning_rate_leaves_the_model_alone() {
    let data = toy_matrices(4, 2, 30);
    let examples: Vec<_> = data.iter().map(|(x, c)| (x, *c)).collect();
    let mut model = init_model(CnnArch::for_input(2, 30).unwrap(), 1).unwrap();
    let before = model.clone();
    let (_, grads) = model.loss_and_grad(&examples).unwrap();
    let mut state = OptimizerState::new(&model.arch);
    let cfg = TrainConfig {
        learning_rate: 0.0,
        ..TrainConfig::default()
    };
    // A zero rate is not a valid training configuration, but the update rule
    // itself must be a no-op.
    assert!(cfg.validate().is_err());
    sgdm_step(&mut model, &grads, &mut state, &cfg).unwrap();
    assert_eq!(model, before);
}

#[test]
fn prediction_ties_and_logit_shifts() {
    let arch = CnnArch::for_input(1, 20).unwrap();
    let mut model = init_model(arch, 0).unwrap();
    model.params.fc_weights.iter_mut().for_each(|w| *w = 0.0);
    let x = FeatureMatrix::from_values(1, 20, vec![0.5; 20]).unwrap();
    assert_eq!(model.predict(&x).unwrap(), EventClass::CapacitorSwitching);
    model.params.fc_biases = vec![0.1, 0.7, 0.1, 0.1];
    assert_eq!(model.predict(&x).unwrap(), EventClass::TransformerEnergization);
    model.params.fc_biases.iter_mut().for_each(|b| *b += 1e3);
    assert_eq!(model.predict(&x).unwrap(), EventClass::TransformerEnergization);
    let p = model.probabilities(&x).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn cnn_loss_falls_on_the_default_dataset() {
    let cfg = DatasetConfig::new(0, 20_000.0);
    let plan = plan_dataset(&cfg).unwrap();
    let fms: Vec<FeatureMatrix> = plan
        .iter()
        .map(|e| {
            let rec = e.synthesize(&cfg).unwrap();
            featurize(&extract_window(&rec, DEFAULT_JITTER_S).unwrap(), &BusId::MONITORED).unwrap()
        })
        .collect();
    let labels: Vec<EventClass> = plan.iter().map(|e| e.spec.class).collect();
    let split = split_stratified(&labels, 0.8, 0).unwrap();
    let train: Vec<_> = split.train.iter().map(|&i| (&fms[i], labels[i])).collect();
    let trained = fit(CnnArch::for_input(3, 166).unwrap(), &train, &TrainConfig::default()).unwrap();
    let trace = &trained.loss_trace;
    assert!(trace[0] > trace[49], "{trace:?}");
}

fn clouds(n: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<EventClass>) {
    let mut rng = seed::rng(seed, 51);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        let class = EventClass::ALL[i % 4];
        let x: Vec<f64> = (0..dim)
            .map(|d| {
                let centre = if d % 4 == class.index() { 3.0 } else { 0.0 };
                centre + rng.random_range(-0.5..0.5)
            })
            .collect();
        xs.push(x);
        ys.push(class);
    }
    (xs, ys)
}

#[test]
fn svm_separates_point_clouds_and_is_seeded() {
    let (xs, ys) = clouds(80, 8, 1);
    let cfg = SvmConfig::default();
    let svm = train_svm_ovr(&xs, &ys, &cfg, 5).unwrap();
    let preds: Vec<_> = xs.iter().map(|x| svm.predict(x).unwrap()).collect();
    assert_eq!(accuracy(&preds, &ys), 1.0);
    assert_eq!(svm, train_svm_ovr(&xs, &ys, &cfg, 5).unwrap());

    let scaled: Vec<Vec<f64>> = xs.iter().map(|x| x.iter().map(|v| 10.0 * v).collect()).collect();
    let svm10 = train_svm_ovr(&scaled, &ys, &cfg, 5).unwrap();
    for (x, s) in xs.iter().zip(&scaled) {
        assert_eq!(svm.predict(x).unwrap(), svm10.predict(s).unwrap());
    }
}

#[test]
fn svm_decisions_are_affine() {
    let (xs, ys) = clouds(40, 6, 2);
    let svm = train_svm_ovr(&xs, &ys, &SvmConfig::default(), 0).unwrap();
    let mut rng = seed::rng(2, 52);
    for _ in 0..20 {
        let p: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
        let q: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
        let a = rng.random_range(-2.0..2.0);
        let mix: Vec<f64> = p.iter().zip(&q).map(|(p, q)| a * p + (1.0 - a) * q).collect();
        let (fp, fq, fm) = (
            svm.decision_values(&p).unwrap(),
            svm.decision_values(&q).unwrap(),
            svm.decision_values(&mix).unwrap(),
        );
        for c in 0..4 {
            assert!((fm[c] - (a * fp[c] + (1.0 - a) * fq[c])).abs() < 1e-9);
        }
    }
}

#[test]
fn svm_needs_every_class() {
    let (xs, mut ys) = clouds(20, 4, 3);
    ys.iter_mut().for_each(|y| {
        if *y == EventClass::HighImpedanceFault {
            *y = EventClass::Fault;
        }
    });
    assert!(matches!(
        train_svm_ovr(&xs, &ys, &SvmConfig::default(), 0),
        Err(swec_core::Error::Training(_))
    ));
}

#[test]
fn tmlp_learns_point_clouds_and_checks_taper() {
    let (xs, ys) = clouds(80, 96, 4);
    let cfg = TmlpConfig::default();
    let t = train_tmlp(&xs, &ys, &cfg, 9).unwrap();
    let preds: Vec<_> = xs.iter().map(|x| t.model.predict(x).unwrap()).collect();
    assert_eq!(accuracy(&preds, &ys), 1.0);
    assert_eq!(t, train_tmlp(&xs, &ys, &cfg, 9).unwrap());
    assert_eq!(t.model.net.widths(), vec![96, 64, 16, 4]);
    assert!(TaperedMlp::init(32, &[64, 16], 0).is_err());
    assert!(TaperedMlp::init(96, &[16, 16], 0).is_err());
}

#[test]
fn autoencoder_reconstructs_and_classifies() {
    let (xs, ys) = clouds(80, 12, 6);
    let cfg = AutoencoderConfig {
        code_width: 16,
        pretrain: SgdConfig {
            epochs: 100,
            ..AutoencoderConfig::default().pretrain
        },
        ..AutoencoderConfig::default()
    };
    let a = train_autoencoder_clf(&xs, &ys, &cfg, 2).unwrap();
    let trace = &a.reconstruction_trace;
    assert!(trace[trace.len() - 1] < trace[0] / 10.0, "{trace:?}");
    let preds: Vec<_> = xs.iter().map(|x| a.model.predict(x).unwrap()).collect();
    assert_eq!(accuracy(&preds, &ys), 1.0);
    assert_eq!(a, train_autoencoder_clf(&xs, &ys, &cfg, 2).unwrap());
    a.model.check_shapes().unwrap();
    assert_eq!(a.model.reconstruct(&xs[0]).unwrap().len(), 12);
}

#[test]
fn autoencoder_reconstruction_falls_on_energy_features() {
    let cfg = DatasetConfig::new(2, 5_000.0);
    let plan = plan_dataset(&cfg).unwrap();
    let picked: Vec<_> = plan.iter().step_by(4).collect();
    let xs: Vec<Vec<f64>> = picked
        .iter()
        .map(|e| {
            let rec = e.synthesize(&cfg).unwrap();
            let fm = featurize(&extract_window(&rec, DEFAULT_JITTER_S).unwrap(), &BusId::MONITORED).unwrap();
            energy_features(&fm, 8).unwrap()
        })
        .collect();
    let ys: Vec<EventClass> = picked.iter().map(|e| e.spec.class).collect();
    let a = train_autoencoder_clf(&xs, &ys, &AutoencoderConfig::default(), 0).unwrap();
    let trace = &a.reconstruction_trace;
    assert!(trace[trace.len() - 1] < trace[0], "{trace:?}");
}

#[test]
fn energy_features_follow_bus_permutations() {
    let mut rng = seed::rng(8, 53);
    let rows: Vec<Vec<f64>> = (0..3).map(|_| (0..40).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    let build = |order: [usize; 3]| {
        let wtc = BusId::MONITORED
            .iter()
            .zip(order)
            .map(|(&bus, r)| WtcRow {
                bus,
                coeffs: rows[r].clone(),
            })
            .collect();
        FeatureMatrix::from_rows(wtc, None).unwrap()
    };
    let base = energy_features(&build([0, 1, 2]), 5).unwrap();
    let perm = [2, 0, 1];
    let permuted = energy_features(&build(perm), 5).unwrap();
    let block = 5 * 4;
    for (slot, &src) in perm.iter().enumerate() {
        assert_eq!(permuted[slot * block..(slot + 1) * block], base[src * block..(src + 1) * block]);
    }
}
