use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{LabeledDataset, Labels, Provenance};
use crate::{Result, SampleMatrix};

pub const N_BITS: usize = 12;
const N_CUBIC: usize = 3;
const MASK: u32 = (1 << N_BITS) - 1;

/// Cyclic shift of the 12 inputs: column `j` moves to column `j + 1 mod 12`.
/// Generates the symmetry group the labeling rule is invariant under.
pub fn rotate_row(row: &[u32]) -> Vec<u32> {
    let n = row.len();
    (0..n).map(|j| row[(j + n - 1) % n]).collect()
}

fn rotate(x: u32) -> u32 {
    ((x >> 1) | ((x & 1) << (N_BITS - 1))) & MASK
}

fn orbit(x: u32) -> Vec<u32> {
    let mut members = vec![x];
    let mut y = rotate(x);
    while y != x {
        members.push(y);
        y = rotate(y);
    }
    members
}

fn spins(x: u32) -> [i32; N_BITS] {
    std::array::from_fn(|j| if (x >> (N_BITS - 1 - j)) & 1 == 1 { 1 } else { -1 })
}

/// Seeded rotation-invariant score, odd under complementing every bit:
/// `a0 Σ s_j + Σ_k a_k Σ_j s_j s_{j+d_k} s_{j+e_k}` with spins `s = ±1`.
struct Score {
    linear: f64,
    cubic: Vec<(usize, usize, f64)>,
}

impl Score {
    fn seeded(rng: &mut ChaCha8Rng) -> Self {
        let linear = rng.random_range(0.5..1.0);
        let mut offsets: Vec<(usize, usize)> = (1..N_BITS)
            .flat_map(|d| (d + 1..N_BITS).map(move |e| (d, e)))
            .collect();
        offsets.shuffle(rng);
        let cubic = offsets[..N_CUBIC]
            .iter()
            .map(|&(d, e)| (d, e, rng.random_range(-1.0..1.0)))
            .collect();
        Score { linear, cubic }
    }

    fn eval(&self, x: u32) -> f64 {
        let s = spins(x);
        let h1: i32 = s.iter().sum();
        let mut total = self.linear * f64::from(h1);
        for &(d, e, a) in &self.cubic {
            let h: i32 = (0..N_BITS).map(|j| s[j] * s[(j + d) % N_BITS] * s[(j + e) % N_BITS]).sum();
            total += a * f64::from(h);
        }
        total
    }
}

/// All 4096 patterns of 12 bits with a balanced binary label.
///
/// Labels are constant on orbits of the cyclic shift. Orbits that are not
/// closed under complement are paired with their complement orbit and get
/// opposite labels from the sign of a seeded odd score (a seeded coin on a
/// zero score). Self-complementary orbits are split by a seeded exact subset
/// sum so that exactly half of all patterns are labeled 1.
pub fn gen_binary_classification(seed: u64) -> Result<LabeledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let score = Score::seeded(&mut rng);

    let mut label = vec![u8::MAX; 1 << N_BITS];
    let mut self_complementary: Vec<Vec<u32>> = Vec::new();
    for x in 0..1u32 << N_BITS {
        if label[x as usize] != u8::MAX {
            continue;
        }
        let members = orbit(x);
        let complement: Vec<u32> = members.iter().map(|&m| !m & MASK).collect();
        if members.contains(&complement[0]) {
            members.iter().for_each(|&m| label[m as usize] = 2);
            self_complementary.push(members);
            continue;
        }
        let s = score.eval(x);
        let coin = rng.random::<bool>();
        let l = if s > 0.0 || (s == 0.0 && coin) { 1 } else { 0 };
        members.iter().for_each(|&m| label[m as usize] = l);
        complement.iter().for_each(|&m| label[m as usize] = 1 - l);
    }

    self_complementary.shuffle(&mut rng);
    let total: usize = self_complementary.iter().map(Vec::len).sum();
    let chosen = subset_with_sum(&self_complementary.iter().map(Vec::len).collect::<Vec<_>>(), total / 2)
        .expect("self-complementary orbits admit an even split");
    for (i, members) in self_complementary.iter().enumerate() {
        let l = u8::from(chosen[i]);
        members.iter().for_each(|&m| label[m as usize] = l);
    }

    let x = Array2::from_shape_fn((1 << N_BITS, N_BITS), |(r, j)| f64::from((r >> (N_BITS - 1 - j)) as u32 & 1));
    let labels = label.iter().map(|&l| usize::from(l)).collect();
    let meta = Provenance::new("binary_classification", Some(seed))
        .param("n_bits", N_BITS)
        .param("symmetry", "cyclic_shift")
        .param("score_linear", score.linear)
        .param(
            "score_cubic",
            score
                .cubic
                .iter()
                .map(|&(d, e, a)| BTreeMap::from([("d", d as f64), ("e", e as f64), ("a", a)]))
                .collect::<Vec<_>>(),
        );
    LabeledDataset::new(
        SampleMatrix::with_prefix(x, "x")?,
        Labels::Classes { labels, n_classes: 2 },
        meta,
    )
}

/// First subset (in item order, preferring inclusion) whose sizes sum to `target`.
fn subset_with_sum(sizes: &[usize], target: usize) -> Option<Vec<bool>> {
    // reach[i][s]: sum s is attainable from items i..
    let n = sizes.len();
    let mut reach = vec![vec![false; target + 1]; n + 1];
    reach[n][0] = true;
    for i in (0..n).rev() {
        for s in 0..=target {
            reach[i][s] = reach[i + 1][s] || (s >= sizes[i] && reach[i + 1][s - sizes[i]]);
        }
    }
    if !reach[0][target] {
        return None;
    }
    let mut pick = vec![false; n];
    let mut s = target;
    for i in 0..n {
        if s >= sizes[i] && reach[i + 1][s - sizes[i]] {
            pick[i] = true;
            s -= sizes[i];
        }
    }
    Some(pick)
}
