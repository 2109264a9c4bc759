//! Fixtures and independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::HashMap;
use std::hash::Hash;

use infoplane::estimators::{BinnedMatrix, DiscreteView};
use infoplane::nets::{ActivationKind, DenseNet, LossKind, NetSpec, OutputHead, Targets};
use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All `2^n` rows of `n` bits, most significant bit first.
pub fn all_bits(n: usize) -> BinnedMatrix {
    let rows: Vec<u32> = (0..1u32 << n)
        .flat_map(|x| (0..n).map(move |j| (x >> (n - 1 - j)) & 1))
        .collect();
    BinnedMatrix::from_symbols(Array2::from_shape_vec((1 << n, n), rows).unwrap()).unwrap()
}

pub fn matrix(rows: &[Vec<u32>]) -> BinnedMatrix {
    let n = rows[0].len();
    let flat: Vec<u32> = rows.iter().flatten().copied().collect();
    BinnedMatrix::from_symbols(Array2::from_shape_vec((rows.len(), n), flat).unwrap()).unwrap()
}

pub fn view(s: &[u32]) -> DiscreteView {
    DiscreteView::from_values(s).unwrap()
}

/// Row tuples of a binned matrix restricted to `cols`.
pub fn tuples(x: &BinnedMatrix, cols: &[usize]) -> Vec<Vec<u32>> {
    (0..x.n_samples())
        .map(|r| cols.iter().map(|&c| x.bins()[[r, c]]).collect())
        .collect()
}

fn entropy_of<K: Eq + Hash>(keys: impl Iterator<Item = K>, weights: &[f64]) -> f64 {
    let mut mass: HashMap<K, f64> = HashMap::new();
    for (k, &w) in keys.zip(weights) {
        *mass.entry(k).or_default() += w;
    }
    -mass
        .values()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Oracle `I(A;B) = H(A) + H(B) - H(A,B)` in bits over weighted samples.
pub fn oracle_mi<A, B>(a: &[A], b: &[B], weights: Option<&[f64]>) -> f64
where
    A: Eq + Hash + Clone,
    B: Eq + Hash + Clone,
{
    let n = a.len();
    let uniform = vec![1.0 / n as f64; n];
    let w = weights.unwrap_or(&uniform);
    let ha = entropy_of(a.iter().cloned(), w);
    let hb = entropy_of(b.iter().cloned(), w);
    let hab = entropy_of(a.iter().cloned().zip(b.iter().cloned()), w);
    ha + hb - hab
}

pub fn oracle_entropy<A: Eq + Hash + Clone>(a: &[A]) -> f64 {
    let n = a.len();
    entropy_of(a.iter().cloned(), &vec![1.0 / n as f64; n])
}

/// Oracle PMI weights: `n c(z,y) / (c(z) c(y))`, normalized.
pub fn oracle_pmi_weights(z: &[u32], y: &[u32]) -> Vec<f64> {
    let mut cz: HashMap<u32, f64> = HashMap::new();
    let mut cy: HashMap<u32, f64> = HashMap::new();
    let mut czy: HashMap<(u32, u32), f64> = HashMap::new();
    for (&a, &b) in z.iter().zip(y) {
        *cz.entry(a).or_default() += 1.0;
        *cy.entry(b).or_default() += 1.0;
        *czy.entry((a, b)).or_default() += 1.0;
    }
    let n = z.len() as f64;
    let raw: Vec<f64> = z
        .iter()
        .zip(y)
        .map(|(&a, &b)| n * czy[&(a, b)] / (cz[&a] * cy[&b]))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

/// A random deterministic Boolean function on all inputs of 3 to 6 bits.
pub struct BooleanInstance {
    pub n: usize,
    pub x: BinnedMatrix,
    pub y: Vec<u32>,
}

pub fn boolean_instance<R: Rng>(rng: &mut R) -> BooleanInstance {
    let n = rng.random_range(3..=6usize);
    let y = (0..1usize << n).map(|_| u32::from(rng.random::<bool>())).collect();
    BooleanInstance {
        n,
        x: all_bits(n),
        y,
    }
}

pub const ALL_ACTIVATIONS: [ActivationKind; 7] = [
    ActivationKind::Identity,
    ActivationKind::Square,
    ActivationKind::Tanh,
    ActivationKind::Relu,
    ActivationKind::LeakyRelu { slope: 0.01 },
    ActivationKind::Softplus,
    ActivationKind::Swish,
];

/// Worst finite-difference disagreement over sampled parameter coordinates.
pub struct GradCheck {
    pub max_rel_err: f64,
    pub coords: usize,
}

pub const FD_STEP: f64 = 1e-5;
/// Below this magnitude a gradient is compared absolutely rather than relatively.
pub const FD_FLOOR: f64 = 1e-4;

/// Central-difference check of a small network with one (activation, loss) pair.
///
/// Inputs are redrawn until every hidden pre-activation is at least `1e-3`
/// away from zero, so kinks are never straddled.
pub fn gradient_check(activation: ActivationKind, loss: LossKind, seed: u64) -> GradCheck {
    let head = match loss {
        LossKind::Mse => OutputHead::Linear,
        LossKind::CrossEntropy => OutputHead::Softmax,
    };
    let spec = NetSpec {
        input: 4,
        hidden: vec![8, 6],
        output: 3,
        activation,
        head,
        bias: true,
    };
    let mut r = rng(seed);
    let net = DenseNet::init(&spec, &mut r).unwrap();
    let n = 6;
    let x = loop {
        let x = Array2::from_shape_fn((n, 4), |_| r.random_range(-1.5..1.5));
        let pass = net.forward_pass(x.view()).unwrap();
        let hidden = &pass.pre[..pass.pre.len() - 1];
        if hidden.iter().all(|p| p.iter().all(|v| v.abs() > 1e-3)) {
            break x;
        }
    };
    let targets = match loss {
        LossKind::Mse => Targets::Real(Array2::from_shape_fn((n, 3), |_| r.random_range(-1.0..1.0))),
        LossKind::CrossEntropy => Targets::Classes {
            labels: (0..n).map(|i| i % 3).collect(),
            n_classes: 3,
        },
    };
    grad_check_at(&net, x.view(), &targets, loss, &mut r, 100)
}

pub fn grad_check_at(
    net: &DenseNet,
    x: ArrayView2<'_, f64>,
    targets: &Targets,
    loss: LossKind,
    r: &mut ChaCha8Rng,
    coords: usize,
) -> GradCheck {
    let (_, g) = net.gradients(x, targets, loss, false).unwrap();
    let analytic = g.flatten();
    let total = net.param_count();
    let mut picks: Vec<usize> = (0..total).collect();
    if total > coords {
        picks = rand::seq::index::sample(r, total, coords).into_vec();
    }
    let mut worst = 0.0f64;
    for &k in &picks {
        let mut plus = net.clone();
        *plus.param_mut(k).unwrap() += FD_STEP;
        let mut minus = net.clone();
        *minus.param_mut(k).unwrap() -= FD_STEP;
        let fd = (plus.loss(x, targets, loss).unwrap() - minus.loss(x, targets, loss).unwrap())
            / (2.0 * FD_STEP);
        let a = analytic[k];
        let scale = a.abs().max(fd.abs()).max(FD_FLOOR);
        worst = worst.max((a - fd).abs() / scale);
    }
    GradCheck {
        max_rel_err: worst,
        coords: picks.len(),
    }
}
