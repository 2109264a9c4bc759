use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use rayon::prelude::*;

use super::binning::BinnedMatrix;
use crate::{Error, Result};

/// Tolerance on the total mass of a weight vector.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Per-sample probability weights shared between views.
///
/// Cloning is cheap; two views computed against the same reweighting hold
/// the same allocation.
#[derive(Debug, Clone)]
pub struct Weights(Arc<[f64]>);

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(i) = values.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "weight {i} is negative or non-finite"
            )));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Weights(values.into()))
    }

    /// Normalizes non-negative masses to sum 1.
    pub fn from_unnormalized(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidWeights(format!("total mass {total}")));
        }
        Weights::new(masses.iter().map(|m| m / total).collect())
    }

    /// `1/n` for every sample.
    pub fn uniform(n: usize) -> Result<Self> {
        Weights::new(vec![uniform_mass(n); n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn same_as(&self, other: &Weights) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

pub(crate) fn uniform_mass(n: usize) -> f64 {
    1.0 / n as f64
}

/// One discrete variable observed on every sample: a stream of symbol ids,
/// optionally carrying per-sample weights.
#[derive(Debug, Clone)]
pub struct DiscreteView {
    symbols: Arc<[u32]>,
    alphabet_size: usize,
    weights: Option<Weights>,
}

impl DiscreteView {
    pub fn new(symbols: Vec<u32>, alphabet_size: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidView("no samples".into()));
        }
        if alphabet_size == 0 {
            return Err(Error::InvalidView("alphabet size must be positive".into()));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= alphabet_size) {
            return Err(Error::InvalidView(format!(
                "symbol {s} outside alphabet of size {alphabet_size}"
            )));
        }
        Ok(DiscreteView {
            symbols: symbols.into(),
            alphabet_size,
            weights: None,
        })
    }

    /// Relabels arbitrary hashable values to symbol ids in first-occurrence order.
    pub fn from_values<T: Eq + Hash + Clone>(values: &[T]) -> Result<Self> {
        let mut ids = HashMap::new();
        let symbols = values
            .iter()
            .map(|v| {
                let next = ids.len() as u32;
                *ids.entry(v.clone()).or_insert(next)
            })
            .collect();
        let alphabet = ids.len();
        DiscreteView::new(symbols, alphabet)
    }

    /// Attaches weights; their length must equal the number of samples.
    pub fn with_weights(mut self, weights: Weights) -> Result<Self> {
        if weights.len() != self.symbols.len() {
            return Err(Error::LengthMismatch {
                left: self.symbols.len(),
                right: weights.len(),
            });
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn weights(&self) -> Option<&Weights> {
        self.weights.as_ref()
    }

    pub fn n_samples(&self) -> usize {
        self.symbols.len()
    }

    /// Number of distinct symbols that actually occur.
    pub fn n_observed(&self) -> usize {
        let mut seen = vec![false; self.alphabet_size];
        self.symbols.iter().for_each(|&s| seen[s as usize] = true);
        seen.into_iter().filter(|&b| b).count()
    }
}

/// Maps each sample's tuple of bins over `columns` to a single symbol.
///
/// Ids follow first-occurrence order, so the alphabet size equals the number of
/// distinct tuples and identical inputs always give identical views.
pub fn joint_view(binned: &BinnedMatrix, columns: &[usize]) -> Result<DiscreteView> {
    if columns.is_empty() {
        return Err(Error::EmptySelection);
    }
    for &c in columns {
        if c >= binned.n_columns() {
            return Err(Error::ColumnOutOfRange {
                index: c,
                n_columns: binned.n_columns(),
            });
        }
    }
    Ok(RowGrouper::new(binned).group(columns, None))
}

/// Joint views over every column but one, for each column in turn
/// (the leave-one-out feature sets).
pub fn leave_one_out_views(binned: &BinnedMatrix) -> Result<Vec<DiscreteView>> {
    if binned.n_columns() < 2 {
        return Err(Error::TooFewFeatures {
            needed: 2,
            got: binned.n_columns(),
        });
    }
    let grouper = RowGrouper::new(binned);
    let all: Vec<usize> = (0..binned.n_columns()).collect();
    Ok((0..binned.n_columns())
        .into_par_iter()
        .map(|i| grouper.group(&all, Some(i)))
        .collect())
}

/// Single-column views, one per column.
pub fn column_views(binned: &BinnedMatrix) -> Vec<DiscreteView> {
    let grouper = RowGrouper::new(binned);
    (0..binned.n_columns())
        .into_par_iter()
        .map(|c| grouper.group(&[c], None))
        .collect()
}

/// Assigns first-occurrence ids to row tuples.
///
/// When the product of column alphabets fits in 64 bits a mixed-radix code is
/// an exact key. Otherwise rows are keyed by a sum of per-(column, bin) random
/// 128-bit words, and every key match is confirmed by comparing the tuples,
/// so colliding keys never merge distinct tuples.
struct RowGrouper<'a> {
    binned: &'a BinnedMatrix,
    // observed max + 1 per column
    radix: Vec<u64>,
}

enum RowKeys {
    Exact(Vec<u64>),
    Hashed(Vec<u128>),
}

impl<'a> RowGrouper<'a> {
    fn new(binned: &'a BinnedMatrix) -> Self {
        let radix = (0..binned.n_columns())
            .map(|c| u64::from(binned.column(c).iter().copied().max().unwrap_or(0)) + 1)
            .collect();
        RowGrouper { binned, radix }
    }

    fn group(&self, columns: &[usize], skip: Option<usize>) -> DiscreteView {
        let cols: Vec<usize> = columns
            .iter()
            .copied()
            .filter(|&c| Some(c) != skip)
            .collect();
        let (symbols, alphabet) = match self.keys(&cols) {
            RowKeys::Exact(keys) => first_occurrence_ids(&keys),
            RowKeys::Hashed(keys) => self.verified_ids(&keys, &cols),
        };
        DiscreteView {
            symbols: symbols.into(),
            alphabet_size: alphabet,
            weights: None,
        }
    }

    fn keys(&self, cols: &[usize]) -> RowKeys {
        let bins = self.binned.bins();
        let n = self.binned.n_samples();
        let mut span: Option<u64> = Some(1);
        for &c in cols {
            span = span.and_then(|s| s.checked_mul(self.radix[c]));
        }
        if span.is_some() {
            let mut keys = vec![0u64; n];
            let mut scale = 1u64;
            for &c in cols {
                for (k, &b) in keys.iter_mut().zip(bins.column(c)) {
                    *k += u64::from(b) * scale;
                }
                scale = scale.wrapping_mul(self.radix[c]);
            }
            RowKeys::Exact(keys)
        } else {
            let mut keys = vec![0u128; n];
            for &c in cols {
                for (k, &b) in keys.iter_mut().zip(bins.column(c)) {
                    *k = k.wrapping_add(cell_word(c, b));
                }
            }
            RowKeys::Hashed(keys)
        }
    }

    fn verified_ids(&self, keys: &[u128], cols: &[usize]) -> (Vec<u32>, usize) {
        let bins = self.binned.bins();
        let same = |a: usize, b: usize| cols.iter().all(|&c| bins[[a, c]] == bins[[b, c]]);
        let mut buckets: HashMap<u128, Vec<(usize, u32)>> = HashMap::with_capacity(keys.len());
        let mut symbols = Vec::with_capacity(keys.len());
        let mut next = 0u32;
        for (row, &key) in keys.iter().enumerate() {
            let bucket = buckets.entry(key).or_default();
            let id = match bucket.iter().find(|&&(rep, _)| same(rep, row)) {
                Some(&(_, id)) => id,
                None => {
                    bucket.push((row, next));
                    next += 1;
                    next - 1
                }
            };
            symbols.push(id);
        }
        (symbols, next as usize)
    }
}

fn first_occurrence_ids(keys: &[u64]) -> (Vec<u32>, usize) {
    let mut ids: HashMap<u64, u32> = HashMap::with_capacity(keys.len().min(1 << 16));
    let symbols = keys
        .iter()
        .map(|&k| {
            let next = ids.len() as u32;
            *ids.entry(k).or_insert(next)
        })
        .collect();
    (symbols, ids.len())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cell_word(column: usize, bin: u32) -> u128 {
    let seed = ((column as u64) << 32) | u64::from(bin);
    let hi = splitmix64(seed);
    let lo = splitmix64(seed ^ 0xD1B5_4A32_D192_ED03);
    (u128::from(hi) << 64) | u128::from(lo)
}
