use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::ActivationKind;
use crate::{Error, Result, SampleMatrix};

/// Negative-slope parameter of the default fan-in initialization.
const INIT_NEGATIVE_SLOPE: f64 = 2.236_067_977_499_79; // sqrt(5)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputHead {
    Linear,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    CrossEntropy,
}

/// Training targets: real-valued rows or class labels.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Real(Array2<f64>),
    Classes { labels: Vec<usize>, n_classes: usize },
}

impl Targets {
    pub fn n_samples(&self) -> usize {
        match self {
            Targets::Real(t) => t.nrows(),
            Targets::Classes { labels, .. } => labels.len(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Targets {
        match self {
            Targets::Real(t) => Targets::Real(t.select(Axis(0), rows)),
            Targets::Classes { labels, n_classes } => Targets::Classes {
                labels: rows.iter().map(|&r| labels[r]).collect(),
                n_classes: *n_classes,
            },
        }
    }

    /// Dense target matrix of width `width` (one-hot rows for class labels).
    fn dense(&self, width: usize) -> Result<Array2<f64>> {
        match self {
            Targets::Real(t) => {
                if t.ncols() != width {
                    return Err(Error::Shape(format!(
                        "targets have {} columns, network outputs {width}",
                        t.ncols()
                    )));
                }
                Ok(t.clone())
            }
            Targets::Classes { labels, n_classes } => {
                if *n_classes != width {
                    return Err(Error::Shape(format!(
                        "{n_classes} classes, network outputs {width}"
                    )));
                }
                let mut m = Array2::zeros((labels.len(), width));
                for (r, &l) in labels.iter().enumerate() {
                    if l >= width {
                        return Err(Error::Shape(format!("label {l} >= {width} classes")));
                    }
                    m[[r, l]] = 1.0;
                }
                Ok(m)
            }
        }
    }
}

/// Layer sizes and nonlinearities of a fully connected network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub input: usize,
    #[serde(default)]
    pub hidden: Vec<usize>,
    pub output: usize,
    pub activation: ActivationKind,
    #[serde(default = "linear_head")]
    pub head: OutputHead,
    #[serde(default)]
    pub bias: bool,
}

fn linear_head() -> OutputHead {
    OutputHead::Linear
}

impl NetSpec {
    pub fn validate(&self) -> Result<()> {
        self.activation.validate()?;
        if self.input == 0 || self.output == 0 || self.hidden.contains(&0) {
            return Err(Error::config("net", "layer widths must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `fan_in x fan_out`
    pub weights: Array2<f64>,
    pub bias: Option<Array1<f64>>,
    pub activation: ActivationKind,
}

/// Fully connected feed-forward network in f64.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
    head: OutputHead,
}

/// Everything a forward pass computes.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Pre-activations per layer.
    pub pre: Vec<Array2<f64>>,
    /// Post-activations per layer; the last entry is the raw output (logits).
    pub post: Vec<Array2<f64>>,
    /// Output after the head (softmax probabilities or the raw output).
    pub outputs: Array2<f64>,
}

impl ForwardPass {
    pub fn logits(&self) -> &Array2<f64> {
        self.post.last().expect("network has at least one layer")
    }

    /// Post-activation values of hidden layers only.
    pub fn hidden(&self) -> &[Array2<f64>] {
        &self.post[..self.post.len() - 1]
    }
}

/// Per-layer parameter gradients, plus the gradient with respect to the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Array2<f64>, Option<Array1<f64>>)>,
    pub input: Option<Array2<f64>>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in &self.layers {
            out.extend(w.iter().copied());
            if let Some(b) = b {
                out.extend(b.iter().copied());
            }
        }
        out
    }

    /// `(self + other) / 2`, layer by layer.
    pub fn average_with(&self, other: &Gradients) -> Gradients {
        let layers = self
            .layers
            .iter()
            .zip(&other.layers)
            .map(|((wa, ba), (wb, bb))| {
                let w = (wa + wb) / 2.0;
                let b = match (ba, bb) {
                    (Some(a), Some(b)) => Some((a + b) / 2.0),
                    _ => None,
                };
                (w, b)
            })
            .collect();
        Gradients {
            layers,
            input: None,
        }
    }

    fn all_finite(&self) -> bool {
        self.layers.iter().all(|(w, b)| {
            w.iter().all(|v| v.is_finite())
                && b.as_ref().is_none_or(|b| b.iter().all(|v| v.is_finite()))
        })
    }
}

impl DenseNet {
    pub fn from_layers(layers: Vec<Layer>, head: OutputHead) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].weights.ncols() != pair[1].weights.nrows() {
                return Err(Error::Shape(format!(
                    "layer widths {} and {} do not chain",
                    pair[0].weights.ncols(),
                    pair[1].weights.nrows()
                )));
            }
        }
        for (i, layer) in layers.iter().enumerate() {
            layer.activation.validate()?;
            if let Some(b) = &layer.bias {
                if b.len() != layer.weights.ncols() {
                    return Err(Error::Shape(format!("bias length mismatch in layer {i}")));
                }
            }
            let finite = layer.weights.iter().all(|v| v.is_finite())
                && layer.bias.as_ref().is_none_or(|b| b.iter().all(|v| v.is_finite()));
            if !finite {
                return Err(Error::NonFiniteIntermediate("network parameters"));
            }
        }
        Ok(DenseNet { layers, head })
    }

    /// Fan-in uniform initialization: hidden weights on
    /// `±sqrt(6 / ((1 + a^2) fan_in))` with `a = sqrt(5)`, the output layer and
    /// all biases on `±sqrt(1 / fan_in)`. Parameters are drawn layer by layer
    /// in row-major order.
    pub fn init<R: Rng + ?Sized>(spec: &NetSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let mut widths = vec![spec.input];
        widths.extend_from_slice(&spec.hidden);
        widths.push(spec.output);
        let n_layers = widths.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let is_output = l + 1 == n_layers;
            let bound = if is_output {
                (1.0 / fan_in as f64).sqrt()
            } else {
                let a2 = INIT_NEGATIVE_SLOPE * INIT_NEGATIVE_SLOPE;
                (6.0 / ((1.0 + a2) * fan_in as f64)).sqrt()
            };
            let weights =
                Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-bound..bound));
            let bias = spec.bias.then(|| {
                let bb = (1.0 / fan_in as f64).sqrt();
                Array1::from_shape_simple_fn(fan_out, || rng.random_range(-bb..bb))
            });
            let activation = if is_output {
                ActivationKind::Identity
            } else {
                spec.activation
            };
            layers.push(Layer {
                weights,
                bias,
                activation,
            });
        }
        DenseNet::from_layers(layers, spec.head)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn head(&self) -> OutputHead {
        self.head
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weights.ncols())
    }

    pub fn n_hidden(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn forward_pass(&self, x: ArrayView2<'_, f64>) -> Result<ForwardPass> {
        if x.ncols() != self.input_width() {
            return Err(Error::Shape(format!(
                "input has {} columns, network expects {}",
                x.ncols(),
                self.input_width()
            )));
        }
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let input = post.last().map_or(x, |a| a.view());
            let mut z = input.dot(&layer.weights);
            if let Some(b) = &layer.bias {
                z += b;
            }
            let act = layer.activation;
            let a = z.mapv(|v| act.apply(v));
            pre.push(z);
            post.push(a);
        }
        let logits = post.last().expect("non-empty");
        let outputs = match self.head {
            OutputHead::Linear => logits.clone(),
            OutputHead::Softmax => softmax_rows(logits),
        };
        Ok(ForwardPass { pre, post, outputs })
    }

    /// Outputs after the head and every hidden post-activation layer.
    pub fn forward(&self, x: &SampleMatrix) -> Result<(SampleMatrix, Vec<SampleMatrix>)> {
        let pass = self.forward_pass(x.values().view())?;
        let outputs = SampleMatrix::with_prefix(pass.outputs.clone(), "out")?;
        let hidden = pass
            .hidden()
            .iter()
            .map(|h| SampleMatrix::with_prefix(h.clone(), "t"))
            .collect::<Result<Vec<_>>>()?;
        Ok((outputs, hidden))
    }

    /// Mean loss of the network on `(x, targets)`.
    pub fn loss(&self, x: ArrayView2<'_, f64>, targets: &Targets, loss: LossKind) -> Result<f64> {
        let pass = self.forward_pass(x)?;
        let t = targets.dense(self.output_width())?;
        self.loss_of(&pass, &t, loss)
    }

    fn loss_of(&self, pass: &ForwardPass, t: &Array2<f64>, loss: LossKind) -> Result<f64> {
        let n = t.nrows() as f64;
        match loss {
            LossKind::Mse => {
                let diff = &pass.outputs - t;
                Ok(diff.mapv(|d| d * d).sum() / (n * t.ncols() as f64))
            }
            LossKind::CrossEntropy => {
                if self.head != OutputHead::Softmax {
                    return Err(Error::InvalidArgument(
                        "cross-entropy requires a softmax head".into(),
                    ));
                }
                let log_p = log_softmax_rows(pass.logits());
                Ok(-(&log_p * t).sum() / n)
            }
        }
    }

    /// Mean loss and reverse-mode gradients of every parameter.
    /// With `with_input` the gradient with respect to `x` is returned too.
    pub fn gradients(
        &self,
        x: ArrayView2<'_, f64>,
        targets: &Targets,
        loss: LossKind,
        with_input: bool,
    ) -> Result<(f64, Gradients)> {
        let pass = self.forward_pass(x)?;
        let t = targets.dense(self.output_width())?;
        if t.nrows() != x.nrows() {
            return Err(Error::LengthMismatch {
                left: x.nrows(),
                right: t.nrows(),
            });
        }
        let value = self.loss_of(&pass, &t, loss)?;
        if !value.is_finite() {
            return Err(Error::NonFiniteIntermediate("loss"));
        }
        let n = t.nrows() as f64;

        // dL/d(raw output)
        let mut delta = match (loss, self.head) {
            (LossKind::CrossEntropy, _) => (&pass.outputs - &t) / n,
            (LossKind::Mse, OutputHead::Linear) => {
                (&pass.outputs - &t) * (2.0 / (n * t.ncols() as f64))
            }
            (LossKind::Mse, OutputHead::Softmax) => {
                let g = (&pass.outputs - &t) * (2.0 / (n * t.ncols() as f64));
                let p = &pass.outputs;
                let dot = (&g * p).sum_axis(Axis(1)).insert_axis(Axis(1));
                p * &(&g - &dot)
            }
        };

        let mut layers = vec![(Array2::zeros((0, 0)), None); self.layers.len()];
        let mut input_grad = None;
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let act = layer.activation;
            Zip::from(&mut delta)
                .and(&pass.pre[l])
                .for_each(|d, &z| *d *= act.derivative(z));
            let a_prev = if l == 0 { x } else { pass.post[l - 1].view() };
            let gw = a_prev.t().dot(&delta);
            let gb = layer.bias.as_ref().map(|_| delta.sum_axis(Axis(0)));
            if l > 0 || with_input {
                let back = delta.dot(&layer.weights.t());
                if l == 0 {
                    input_grad = Some(back);
                } else {
                    delta = back;
                }
            }
            layers[l] = (gw, gb);
        }
        let grads = Gradients {
            layers,
            input: input_grad,
        };
        if !grads.all_finite() {
            return Err(Error::NonFiniteIntermediate("gradients"));
        }
        Ok((value, grads))
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.as_ref().map_or(0, |b| b.len()))
            .sum()
    }

    /// Mutable access to parameter `k` in [`Gradients::flatten`] order.
    pub fn param_mut(&mut self, mut k: usize) -> Option<&mut f64> {
        for layer in &mut self.layers {
            let nw = layer.weights.len();
            if k < nw {
                let cols = layer.weights.ncols();
                return layer.weights.get_mut([k / cols, k % cols]);
            }
            k -= nw;
            if let Some(b) = &mut layer.bias {
                if k < b.len() {
                    return b.get_mut(k);
                }
                k -= b.len();
            }
        }
        None
    }

    pub fn params_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|v| v.is_finite())
                && l.bias.as_ref().is_none_or(|b| b.iter().all(|v| v.is_finite()))
        })
    }
}

pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row /= s;
    }
    out
}

pub fn log_softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
        row.mapv_inplace(|v| v - lse);
    }
    out
}
