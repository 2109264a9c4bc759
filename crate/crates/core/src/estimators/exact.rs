use std::collections::{HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::plugin::clamp_mi;
use crate::{Error, Result};

pub const PMF_SUM_TOLERANCE: f64 = 1e-12;

/// Fully enumerated joint distribution over outcome tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPmf {
    support: Vec<Vec<u32>>,
    probs: Vec<f64>,
}

impl ExactPmf {
    pub fn new(support: Vec<Vec<u32>>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::InvalidPmf(format!(
                "{} outcomes with {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        let arity = support[0].len();
        if support.iter().any(|t| t.len() != arity) {
            return Err(Error::InvalidPmf("outcome tuples differ in length".into()));
        }
        if let Some(i) = probs.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidPmf(format!("probability {i} invalid")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(Error::InvalidPmf(format!("probabilities sum to {total}")));
        }
        let mut seen = HashSet::with_capacity(support.len());
        if let Some(dup) = support.iter().find(|t| !seen.insert(t.as_slice())) {
            return Err(Error::InvalidPmf(format!("duplicate outcome {dup:?}")));
        }
        Ok(ExactPmf { support, probs })
    }

    pub fn support(&self) -> &[Vec<u32>] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn arity(&self) -> usize {
        self.support[0].len()
    }

    /// Marginal over the listed coordinates, in first-occurrence order.
    pub fn marginal(&self, coords: &[usize]) -> Result<ExactPmf> {
        self.check_coords(coords)?;
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for (t, &p) in self.support.iter().zip(&self.probs) {
            let key: Vec<u32> = coords.iter().map(|&c| t[c]).collect();
            let slot = *index.entry(key.clone()).or_insert_with(|| {
                support.push(key);
                probs.push(0.0);
                probs.len() - 1
            });
            probs[slot] += p;
        }
        Ok(ExactPmf { support, probs })
    }

    /// Extends every outcome with `f(outcome)` as an extra coordinate.
    pub fn with_derived(&self, f: impl Fn(&[u32]) -> u32) -> ExactPmf {
        let support = self
            .support
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.push(f(&t));
                t
            })
            .collect();
        ExactPmf {
            support,
            probs: self.probs.clone(),
        }
    }

    /// Draws `m` i.i.d. outcome indices by inverse-CDF sampling.
    pub fn sample_indices<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<usize> {
        let mut cdf = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p;
            cdf.push(acc);
        }
        let last = self.probs.len() - 1;
        (0..m)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                cdf.partition_point(|&c| c <= u).min(last)
            })
            .collect()
    }

    fn check_coords(&self, coords: &[usize]) -> Result<()> {
        if coords.is_empty() {
            return Err(Error::InvalidCoordinates("empty coordinate set".into()));
        }
        if let Some(&c) = coords.iter().find(|&&c| c >= self.arity()) {
            return Err(Error::InvalidCoordinates(format!(
                "coordinate {c} outside arity {}",
                self.arity()
            )));
        }
        Ok(())
    }
}

/// Exact `I(A;B)` in bits, marginalizing the pmf onto two disjoint coordinate sets.
pub fn exact_mi(pmf: &ExactPmf, a_coords: &[usize], b_coords: &[usize]) -> Result<f64> {
    pmf.check_coords(a_coords)?;
    pmf.check_coords(b_coords)?;
    if a_coords.iter().any(|c| b_coords.contains(c)) {
        return Err(Error::InvalidCoordinates(format!(
            "{a_coords:?} and {b_coords:?} overlap"
        )));
    }
    let mut pa: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut pb: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut pab: Vec<(Vec<u32>, Vec<u32>, f64)> = Vec::new();
    let mut pab_index: HashMap<(Vec<u32>, Vec<u32>), usize> = HashMap::new();
    for (t, &p) in pmf.support.iter().zip(&pmf.probs) {
        let ka: Vec<u32> = a_coords.iter().map(|&c| t[c]).collect();
        let kb: Vec<u32> = b_coords.iter().map(|&c| t[c]).collect();
        *pa.entry(ka.clone()).or_insert(0.0) += p;
        *pb.entry(kb.clone()).or_insert(0.0) += p;
        let slot = *pab_index.entry((ka.clone(), kb.clone())).or_insert_with(|| {
            pab.push((ka, kb, 0.0));
            pab.len() - 1
        });
        pab[slot].2 += p;
    }
    let mi: f64 = pab
        .iter()
        .filter(|(_, _, p)| *p > 0.0)
        .map(|(ka, kb, p)| p * (p / (pa[ka] * pb[kb])).log2())
        .sum();
    Ok(clamp_mi(mi))
}
