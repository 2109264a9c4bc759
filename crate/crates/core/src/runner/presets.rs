//! Ready-made configurations for the bundled experiments.

use std::path::{Path, PathBuf};

use super::config::{DatasetParams, ExperimentConfig, ExperimentKind, HiddenRange, IbLayer};
use crate::datagen::{SimpleFunction, SynergyFunction, DEFAULT_SAMPLES, DEFAULT_TEST_RANGE, TRAIN_IMAGES_FILE, TRAIN_LABELS_FILE};
use crate::nets::{ActivationKind, AttackSpec, Batch, LossKind, NetSpec, Optimizer, OutputHead, TrainSpec, WeightInit};
use crate::objectives::{Beta, ObjectiveKind};

/// Inputs of the simple-functions suite are expressed in units of 10 so that
/// plain gradient descent at learning rate 0.01 stays stable.
pub const SIMPLE_FUNCTION_INPUT_UNIT: f64 = 10.0;

/// Activations compared in the activation-plane experiment.
pub const PLANE_ACTIVATIONS: [ActivationKind; 5] = [
    ActivationKind::Tanh,
    ActivationKind::Relu,
    ActivationKind::Softplus,
    ActivationKind::Swish,
    ActivationKind::LeakyRelu { slope: crate::nets::DEFAULT_LEAKY_SLOPE },
];

/// Attack strengths of the adversarial preset.
pub const ADVERSARIAL_EPSILONS: [f64; 2] = [0.01, 1.0];

pub fn simple_function_hidden(f: SimpleFunction) -> (usize, ActivationKind) {
    match f {
        SimpleFunction::Add => (4, ActivationKind::Identity),
        SimpleFunction::Mul => (3, ActivationKind::Square),
        SimpleFunction::Sp1 => (16, ActivationKind::Square),
        SimpleFunction::Sp2 => (8, ActivationKind::Square),
        SimpleFunction::Sp3 => (16, ActivationKind::Square),
    }
}

/// One hidden layer, no biases, full-batch gradient descent at 0.01 for
/// 1000 epochs on MSE, 40 bins, probes every 10 epochs, 5 seeds.
pub fn simple_functions(f: SimpleFunction) -> ExperimentConfig {
    let (width, activation) = simple_function_hidden(f);
    ExperimentConfig {
        experiment: ExperimentKind::SimpleFunctions,
        dataset: DatasetParams::SimpleFunction {
            function: f,
            n_train: DEFAULT_SAMPLES,
            n_test: DEFAULT_SAMPLES,
            train_range: None,
            test_range: DEFAULT_TEST_RANGE,
            input_unit: SIMPLE_FUNCTION_INPUT_UNIT,
            data_seed: None,
        },
        net: Some(NetSpec {
            input: f.arity(),
            hidden: vec![width],
            output: 1,
            activation,
            head: OutputHead::Linear,
            bias: false,
        }),
        train: Some(TrainSpec {
            optimizer: Optimizer::Sgd { lr: 0.01 },
            epochs: 1000,
            batch: Batch::Full,
            loss: LossKind::Mse,
            seed: 0,
            weight_init: WeightInit::DefaultUniformFanIn,
        }),
        attack: None,
        probe_every: 10,
        n_bins: 40,
        objectives: vec![ObjectiveKind::Ib, ObjectiveKind::Gib],
        beta: Beta::ONE,
        seeds: (0..5).collect(),
        ib_layer: IbLayer::Final,
        hidden_range: HiddenRange::ActivationBounds,
        feature_subsample: None,
        full_protocol: false,
        output_dir: PathBuf::from("out/simple_functions").join(f.name()),
    }
}

/// 12-bit symmetric task on a 12-10-7-5-4-3-2 softmax net with biases,
/// Adam 1e-3, minibatches of 256, 3000 epochs, 30 bins, probes every 30
/// epochs, 3 seeds.
pub fn activation_plane(activation: ActivationKind) -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentKind::ActivationPlane,
        dataset: DatasetParams::BinaryClassification { data_seed: 0 },
        net: Some(NetSpec {
            input: 12,
            hidden: vec![10, 7, 5, 4, 3],
            output: 2,
            activation,
            head: OutputHead::Softmax,
            bias: true,
        }),
        train: Some(TrainSpec {
            optimizer: Optimizer::Adam { lr: 1e-3 },
            epochs: 3000,
            batch: Batch::Size(256),
            loss: LossKind::CrossEntropy,
            seed: 0,
            weight_init: WeightInit::DefaultUniformFanIn,
        }),
        attack: None,
        probe_every: 30,
        n_bins: 30,
        objectives: vec![ObjectiveKind::Ib, ObjectiveKind::Gib],
        beta: Beta::ONE,
        seeds: (0..3).collect(),
        ib_layer: IbLayer::Final,
        hidden_range: HiddenRange::ActivationBounds,
        feature_subsample: None,
        full_protocol: false,
        output_dir: PathBuf::from("out/activation_plane").join(activation.name()),
    }
}

/// 784-1024-20-20-20-10 tanh net with biases, full-batch Adam 1e-3 on the
/// first 10,000 digits for 2000 epochs under FGSM training, probes every
/// 250 epochs with 30 bins, 2 seeds. `mnist_dir` holds the standard
/// training files.
pub fn adversarial_mnist(epsilon: f64, mnist_dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentKind::AdversarialMnist,
        dataset: DatasetParams::Idx {
            images: mnist_dir.join(TRAIN_IMAGES_FILE),
            labels: mnist_dir.join(TRAIN_LABELS_FILE),
            subset: Some(10_000),
            test_images: None,
            test_labels: None,
        },
        net: Some(NetSpec {
            input: 784,
            hidden: vec![1024, 20, 20, 20],
            output: 10,
            activation: ActivationKind::Tanh,
            head: OutputHead::Softmax,
            bias: true,
        }),
        train: Some(TrainSpec {
            optimizer: Optimizer::Adam { lr: 1e-3 },
            epochs: 2000,
            batch: Batch::Full,
            loss: LossKind::CrossEntropy,
            seed: 0,
            weight_init: WeightInit::DefaultUniformFanIn,
        }),
        attack: Some(AttackSpec { epsilon, clip: true }),
        probe_every: 250,
        n_bins: 30,
        objectives: vec![ObjectiveKind::Ib, ObjectiveKind::Gib],
        beta: Beta::ONE,
        seeds: (0..2).collect(),
        ib_layer: IbLayer::Final,
        hidden_range: HiddenRange::ActivationBounds,
        feature_subsample: None,
        full_protocol: false,
        output_dir: PathBuf::from("out/adversarial_mnist").join(format!("eps_{epsilon}")),
    }
}

/// The published scale: every training digit and 10,000 epochs.
pub fn adversarial_mnist_full(epsilon: f64, mnist_dir: &Path) -> ExperimentConfig {
    let mut c = adversarial_mnist(epsilon, mnist_dir);
    if let DatasetParams::Idx { subset, .. } = &mut c.dataset {
        *subset = None;
    }
    if let Some(t) = &mut c.train {
        t.epochs = 10_000;
    }
    c.full_protocol = true;
    c
}

/// Exact and sampled force-to-1 dependence for n = 3..=8.
pub fn synthetic_synergy() -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentKind::SyntheticSynergy,
        dataset: DatasetParams::ForceToOne {
            p_flip: 1.0 / 3.0,
            n_values: (3..=8).collect(),
            n_samples: 1_000_000,
            functions: Some(SynergyFunction::ALL.to_vec()),
        },
        net: None,
        train: None,
        attack: None,
        probe_every: 1,
        n_bins: 2,
        objectives: Vec::new(),
        beta: Beta::ONE,
        seeds: vec![0],
        ib_layer: IbLayer::Final,
        hidden_range: HiddenRange::ActivationBounds,
        feature_subsample: None,
        full_protocol: false,
        output_dir: PathBuf::from("out/synthetic_synergy"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for f in SimpleFunction::ALL {
            simple_functions(f).validate().unwrap();
        }
        for a in PLANE_ACTIVATIONS {
            activation_plane(a).validate().unwrap();
        }
        adversarial_mnist(0.01, Path::new("/data")).validate().unwrap();
        let full = adversarial_mnist_full(1.0, Path::new("/data"));
        full.validate().unwrap();
        assert!(full.full_protocol);
        synthetic_synergy().validate().unwrap();
    }
}
