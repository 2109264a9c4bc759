use std::collections::BTreeSet;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::plugin::entropy;
use super::view::DiscreteView;
use crate::nets::{
    train_until, ActivationKind, DenseNet, LossKind, NetSpec, OutputHead, Targets, TrainSpec,
    TrainStatus,
};
use crate::{Error, Result, SampleMatrix};

/// Auxiliary predictor recipe for [`loss_comparison_mi`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossComparisonConfig {
    #[serde(default)]
    pub hidden: Vec<usize>,
    pub activation: ActivationKind,
    #[serde(default = "default_bias")]
    pub bias: bool,
    /// Epoch budget, optimizer and seed; the loss is always cross-entropy.
    pub train: TrainSpec,
    /// Stop once the relative loss change over this many epochs ...
    #[serde(default = "default_window")]
    pub plateau_window: usize,
    /// ... falls below this.
    #[serde(default = "default_tolerance")]
    pub plateau_tolerance: f64,
}

fn default_bias() -> bool {
    true
}

fn default_window() -> usize {
    50
}

fn default_tolerance() -> f64 {
    1e-4
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossComparisonEstimate {
    pub bits: f64,
    pub label_entropy: f64,
    pub cross_entropy_bits: f64,
    pub epochs_run: usize,
}

/// MI between features and class labels from the loss of a trained predictor:
/// `H(Y) - CE`, with CE the converged mean cross-entropy in bits, clamped to
/// `[0, H(Y)]`.
pub fn loss_comparison_mi(
    x: &SampleMatrix,
    labels: &[usize],
    n_classes: usize,
    config: &LossComparisonConfig,
) -> Result<LossComparisonEstimate> {
    if labels.len() != x.n_samples() {
        return Err(Error::LengthMismatch {
            left: x.n_samples(),
            right: labels.len(),
        });
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::InvalidArgument(format!(
            "label {l} outside [0, {n_classes})"
        )));
    }
    let label_entropy = entropy(&DiscreteView::from_values(labels)?);
    if label_entropy == 0.0 {
        return Ok(LossComparisonEstimate {
            bits: 0.0,
            label_entropy,
            cross_entropy_bits: 0.0,
            epochs_run: 0,
        });
    }

    let spec = NetSpec {
        input: x.n_columns(),
        hidden: config.hidden.clone(),
        output: n_classes,
        activation: config.activation,
        head: OutputHead::Softmax,
        bias: config.bias,
    };
    let train = TrainSpec {
        loss: LossKind::CrossEntropy,
        ..config.train.clone()
    };
    let net = DenseNet::init(&spec, &mut train.init_rng())?;
    let targets = Targets::Classes {
        labels: labels.to_vec(),
        n_classes,
    };
    let window = config.plateau_window.max(1);
    let tolerance = config.plateau_tolerance;
    let outcome = train_until(
        net,
        x.values().view(),
        &targets,
        &train,
        None,
        &BTreeSet::new(),
        |_| Ok(()),
        |history| plateaued(history, window, tolerance),
    )?;
    if let TrainStatus::Diverged { epoch } = outcome.status {
        return Err(Error::Diverged { epoch });
    }
    let ce_nats = outcome
        .net
        .loss(x.values().view(), &targets, LossKind::CrossEntropy)?;
    if !ce_nats.is_finite() {
        return Err(Error::Diverged {
            epoch: outcome.loss_history.len(),
        });
    }
    let cross_entropy_bits = ce_nats / LN_2;
    Ok(LossComparisonEstimate {
        bits: (label_entropy - cross_entropy_bits).clamp(0.0, label_entropy),
        label_entropy,
        cross_entropy_bits,
        epochs_run: outcome.loss_history.len(),
    })
}

fn plateaued(history: &[f64], window: usize, tolerance: f64) -> bool {
    if history.len() <= window {
        return false;
    }
    let now = history[history.len() - 1];
    let before = history[history.len() - 1 - window];
    before != 0.0 && ((before - now) / before).abs() < tolerance
}
