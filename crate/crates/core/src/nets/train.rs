use std::collections::BTreeSet;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::net::{DenseNet, Gradients, LossKind, Targets};
use crate::{Error, Result};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Stream id separating minibatch shuffling from weight initialization.
const SHUFFLE_STREAM: u64 = 0x5348_5546;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    /// Plain gradient descent, no momentum.
    Sgd { lr: f64 },
    Adam { lr: f64 },
}

impl Optimizer {
    pub fn lr(&self) -> f64 {
        match *self {
            Optimizer::Sgd { lr } | Optimizer::Adam { lr } => lr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Batch {
    Full,
    Size(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightInit {
    #[default]
    DefaultUniformFanIn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub optimizer: Optimizer,
    pub epochs: usize,
    #[serde(default = "full_batch")]
    pub batch: Batch,
    pub loss: LossKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weight_init: WeightInit,
}

fn full_batch() -> Batch {
    Batch::Full
}

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        let lr = self.optimizer.lr();
        if !(lr.is_finite() && lr > 0.0) {
            return Err(Error::config("train.optimizer.lr", "must be positive"));
        }
        if self.epochs == 0 {
            return Err(Error::config("train.epochs", "must be at least 1"));
        }
        if self.batch == Batch::Size(0) {
            return Err(Error::config("train.batch", "batch size must be positive"));
        }
        Ok(())
    }

    /// RNG used to initialize weights for this spec's seed.
    pub fn init_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// FGSM strength in input units, with optional clipping to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub epsilon: f64,
    #[serde(default = "default_clip")]
    pub clip: bool,
}

fn default_clip() -> bool {
    true
}

impl AttackSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::config("attack.epsilon", "must be non-negative"));
        }
        Ok(())
    }
}

/// Epochs (1-based, counted after the epoch's updates) at which to probe.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProbeSchedule {
    pub epochs: BTreeSet<usize>,
    /// Hidden layer indices captured in snapshots.
    pub layers: Vec<usize>,
}

impl ProbeSchedule {
    /// Every `k`-th epoch up to `total`.
    pub fn every(k: usize, total: usize) -> Self {
        ProbeSchedule {
            epochs: (1..=total).filter(|e| e % k.max(1) == 0).collect(),
            layers: Vec::new(),
        }
    }

    pub fn with_layers(mut self, layers: Vec<usize>) -> Self {
        self.layers = layers;
        self
    }
}

/// Network state captured at a probe epoch.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub epoch: usize,
    pub train_loss: f64,
    /// Raw network output (pre-softmax).
    pub logits: Array2<f64>,
    pub hidden: Vec<Array2<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum TrainStatus {
    Completed,
    Diverged { epoch: usize },
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub net: DenseNet,
    /// Mean training loss of every completed epoch.
    pub loss_history: Vec<f64>,
    pub probes: Vec<T>,
    pub status: TrainStatus,
}

/// What a probe callback sees.
pub struct ProbeEvent<'a> {
    pub epoch: usize,
    pub train_loss: f64,
    pub net: &'a DenseNet,
}

/// Trains `net` and records snapshots at the scheduled epochs.
pub fn train(
    net: DenseNet,
    x: ArrayView2<'_, f64>,
    targets: &Targets,
    spec: &TrainSpec,
    probes: &ProbeSchedule,
) -> Result<TrainOutcome<Snapshot>> {
    train_with(net, x, targets, spec, None, &probes.epochs, |ev| {
        snapshot(ev, x, &probes.layers)
    })
}

/// FGSM adversarial training on the mean of clean and adversarial losses.
pub fn adversarial_train(
    net: DenseNet,
    x: ArrayView2<'_, f64>,
    targets: &Targets,
    spec: &TrainSpec,
    attack: &AttackSpec,
    probes: &ProbeSchedule,
) -> Result<TrainOutcome<Snapshot>> {
    train_with(net, x, targets, spec, Some(attack), &probes.epochs, |ev| {
        snapshot(ev, x, &probes.layers)
    })
}

fn snapshot(ev: ProbeEvent<'_>, x: ArrayView2<'_, f64>, layers: &[usize]) -> Result<Snapshot> {
    let pass = ev.net.forward_pass(x)?;
    let hidden = layers
        .iter()
        .map(|&l| {
            pass.hidden()
                .get(l)
                .cloned()
                .ok_or_else(|| Error::Shape(format!("no hidden layer {l}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Snapshot {
        epoch: ev.epoch,
        train_loss: ev.train_loss,
        logits: pass.logits().clone(),
        hidden,
    })
}

/// General training loop.
///
/// Each epoch walks the (seeded, shuffled) minibatches; with an attack every
/// batch example is perturbed by FGSM against the current parameters and the
/// step follows the gradient of `(L_clean + L_adv) / 2`. `on_probe` runs after
/// each scheduled epoch. A non-finite loss stops training and returns the
/// partial history with [`TrainStatus::Diverged`].
pub fn train_with<T>(
    net: DenseNet,
    x: ArrayView2<'_, f64>,
    targets: &Targets,
    spec: &TrainSpec,
    attack: Option<&AttackSpec>,
    probe_epochs: &BTreeSet<usize>,
    on_probe: impl FnMut(ProbeEvent<'_>) -> Result<T>,
) -> Result<TrainOutcome<T>> {
    train_until(net, x, targets, spec, attack, probe_epochs, on_probe, |_| false)
}

/// [`train_with`] that also stops early once `should_stop(loss_history)` holds.
#[allow(clippy::too_many_arguments)]
pub fn train_until<T>(
    mut net: DenseNet,
    x: ArrayView2<'_, f64>,
    targets: &Targets,
    spec: &TrainSpec,
    attack: Option<&AttackSpec>,
    probe_epochs: &BTreeSet<usize>,
    mut on_probe: impl FnMut(ProbeEvent<'_>) -> Result<T>,
    mut should_stop: impl FnMut(&[f64]) -> bool,
) -> Result<TrainOutcome<T>> {
    spec.validate()?;
    if let Some(a) = attack {
        a.validate()?;
    }
    let n = x.nrows();
    if targets.n_samples() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: targets.n_samples(),
        });
    }

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    shuffle_rng.set_stream(SHUFFLE_STREAM);
    let mut optimizer = OptimizerState::new(spec.optimizer, &net);
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_history = Vec::with_capacity(spec.epochs);
    let mut probes = Vec::new();

    for epoch in 1..=spec.epochs {
        let batches: Vec<Vec<usize>> = match spec.batch {
            Batch::Full => vec![],
            Batch::Size(k) if k >= n => vec![],
            Batch::Size(k) => {
                order.shuffle(&mut shuffle_rng);
                order.chunks(k).map(<[usize]>::to_vec).collect()
            }
        };

        let step = if batches.is_empty() {
            step_batch(&mut net, &mut optimizer, x, targets, spec.loss, attack)
        } else {
            let mut total = 0.0;
            let mut result = Ok(());
            for rows in &batches {
                let bx = x.select(Axis(0), rows);
                let bt = targets.select_rows(rows);
                match step_batch(&mut net, &mut optimizer, bx.view(), &bt, spec.loss, attack) {
                    Ok(l) => total += l * rows.len() as f64,
                    Err(e) => {
                        result = Err(e);
                        break;
                    }
                }
            }
            result.map(|()| total / n as f64)
        };

        let loss = match step {
            Ok(loss) if loss.is_finite() && net.params_finite() => loss,
            Ok(_) | Err(Error::NonFiniteIntermediate(_)) => {
                return Ok(TrainOutcome {
                    net,
                    loss_history,
                    probes,
                    status: TrainStatus::Diverged { epoch },
                });
            }
            Err(e) => return Err(e),
        };
        loss_history.push(loss);
        if probe_epochs.contains(&epoch) {
            probes.push(on_probe(ProbeEvent {
                epoch,
                train_loss: loss,
                net: &net,
            })?);
        }
        if should_stop(&loss_history) {
            break;
        }
    }
    Ok(TrainOutcome {
        net,
        loss_history,
        probes,
        status: TrainStatus::Completed,
    })
}

fn step_batch(
    net: &mut DenseNet,
    optimizer: &mut OptimizerState,
    x: ArrayView2<'_, f64>,
    targets: &Targets,
    loss: LossKind,
    attack: Option<&AttackSpec>,
) -> Result<f64> {
    let (value, grads) = match attack {
        None => net.gradients(x, targets, loss, false)?,
        Some(attack) => {
            let (clean, clean_grads) = net.gradients(x, targets, loss, true)?;
            let input_grad = clean_grads.input.as_ref().expect("requested input gradient");
            let x_adv = perturb(x, input_grad.view(), attack);
            let (adv, adv_grads) = net.gradients(x_adv.view(), targets, loss, false)?;
            ((clean + adv) / 2.0, clean_grads.average_with(&adv_grads))
        }
    };
    optimizer.apply(net, &grads);
    Ok(value)
}

/// `x + eps * sign(dL/dx)`, clipped to `[0, 1]` when the attack says so.
pub fn fgsm_perturb(
    net: &DenseNet,
    x: ArrayView2<'_, f64>,
    targets: &Targets,
    loss: LossKind,
    attack: &AttackSpec,
) -> Result<Array2<f64>> {
    attack.validate()?;
    let (_, grads) = net.gradients(x, targets, loss, true)?;
    let g = grads.input.expect("requested input gradient");
    Ok(perturb(x, g.view(), attack))
}

fn perturb(x: ArrayView2<'_, f64>, grad: ArrayView2<'_, f64>, attack: &AttackSpec) -> Array2<f64> {
    let eps = attack.epsilon;
    let mut out = x.to_owned();
    if eps == 0.0 {
        return out;
    }
    ndarray::Zip::from(&mut out).and(grad).for_each(|v, &g| {
        let s = if g > 0.0 {
            1.0
        } else if g < 0.0 {
            -1.0
        } else {
            0.0
        };
        *v += eps * s;
        if attack.clip {
            *v = v.clamp(0.0, 1.0);
        }
    });
    out
}

enum OptimizerState {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        t: i32,
        m: Vec<(Array2<f64>, Option<Array1<f64>>)>,
        v: Vec<(Array2<f64>, Option<Array1<f64>>)>,
    },
}

impl OptimizerState {
    fn new(optimizer: Optimizer, net: &DenseNet) -> Self {
        match optimizer {
            Optimizer::Sgd { lr } => OptimizerState::Sgd { lr },
            Optimizer::Adam { lr } => {
                let zeros: Vec<_> = net
                    .layers()
                    .iter()
                    .map(|l| {
                        (
                            Array2::zeros(l.weights.raw_dim()),
                            l.bias.as_ref().map(|b| Array1::zeros(b.len())),
                        )
                    })
                    .collect();
                OptimizerState::Adam {
                    lr,
                    t: 0,
                    m: zeros.clone(),
                    v: zeros,
                }
            }
        }
    }

    fn apply(&mut self, net: &mut DenseNet, grads: &Gradients) {
        match self {
            OptimizerState::Sgd { lr } => {
                for (layer, (gw, gb)) in net.layers_mut().iter_mut().zip(&grads.layers) {
                    layer.weights.scaled_add(-*lr, gw);
                    if let (Some(b), Some(gb)) = (&mut layer.bias, gb) {
                        b.scaled_add(-*lr, gb);
                    }
                }
            }
            OptimizerState::Adam { lr, t, m, v } => {
                *t += 1;
                let c1 = 1.0 - ADAM_BETA1.powi(*t);
                let c2 = 1.0 - ADAM_BETA2.powi(*t);
                let step = *lr / c1;
                let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    *p -= step * *m / ((*v / c2).sqrt() + ADAM_EPS);
                };
                for (((layer, (gw, gb)), (mw, mb)), (vw, vb)) in net
                    .layers_mut()
                    .iter_mut()
                    .zip(&grads.layers)
                    .zip(m.iter_mut())
                    .zip(v.iter_mut())
                {
                    ndarray::Zip::from(&mut layer.weights)
                        .and(mw)
                        .and(vw)
                        .and(gw)
                        .for_each(|p, m, v, &g| update(p, m, v, g));
                    if let (Some(b), Some(gb), Some(mb), Some(vb)) = (&mut layer.bias, gb, mb, vb) {
                        ndarray::Zip::from(b)
                            .and(mb)
                            .and(vb)
                            .and(gb)
                            .for_each(|p, m, v, &g| update(p, m, v, g));
                    }
                }
            }
        }
    }
}
