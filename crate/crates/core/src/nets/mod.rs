//! Minimal dense-network engine: forward and reverse passes in f64, SGD and
//! Adam, MSE / cross-entropy, FGSM perturbation and adversarial training.

mod activation;
mod net;
mod train;

pub use activation::{ActivationKind, DEFAULT_LEAKY_SLOPE};
pub use net::{
    log_softmax_rows, softmax_rows, DenseNet, ForwardPass, Gradients, Layer, LossKind, NetSpec,
    OutputHead, Targets,
};
pub use train::{
    adversarial_train, fgsm_perturb, train, train_until, train_with, AttackSpec, Batch, Optimizer, ProbeEvent,
    ProbeSchedule, Snapshot, TrainOutcome, TrainSpec, TrainStatus, WeightInit,
};
