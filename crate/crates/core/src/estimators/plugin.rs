use std::collections::HashMap;

use super::view::{uniform_mass, DiscreteView, Weights};
use crate::{Error, Result};

/// Floating-point dust below zero that is clamped away from MI estimates.
pub const MI_CLAMP: f64 = 1e-12;

/// Dense pair tables are used up to this many cells.
const DENSE_PAIR_LIMIT: usize = 1 << 22;

/// Plugin entropy in bits.
///
/// Probabilities aggregate the view's weights per symbol, or `1/n` per sample
/// when the view is unweighted.
pub fn entropy(view: &DiscreteView) -> f64 {
    let masses = symbol_masses(view.symbols(), view.alphabet_size(), view.weights());
    entropy_of_masses(&masses)
}

/// Plugin mutual information `H(a) + H(b) - H(a, b)` in bits.
///
/// Both views are measured under the same weighting: either both unweighted
/// or both carrying the identical weight vector.
pub fn mutual_information(a: &DiscreteView, b: &DiscreteView) -> Result<f64> {
    let weights = shared_weights(a, b)?;
    let h_a = entropy_of_masses(&symbol_masses(a.symbols(), a.alphabet_size(), weights));
    let h_b = entropy_of_masses(&symbol_masses(b.symbols(), b.alphabet_size(), weights));
    if h_a == 0.0 || h_b == 0.0 {
        return Ok(0.0);
    }
    let (pairs, n_pairs) = pair_symbols(a, b);
    let h_ab = entropy_of_masses(&symbol_masses(&pairs, n_pairs, weights));
    Ok(clamp_mi(h_a + h_b - h_ab))
}

/// Joint view of two streams (pair symbols in first-occurrence order).
/// Weights are carried over when both views share them.
pub fn pair_view(a: &DiscreteView, b: &DiscreteView) -> Result<DiscreteView> {
    let weights = shared_weights(a, b)?.cloned();
    let (pairs, n_pairs) = pair_symbols(a, b);
    let view = DiscreteView::new(pairs, n_pairs)?;
    match weights {
        Some(w) => view.with_weights(w),
        None => Ok(view),
    }
}

pub(crate) fn clamp_mi(mi: f64) -> f64 {
    if (-MI_CLAMP..0.0).contains(&mi) {
        0.0
    } else {
        mi
    }
}

fn shared_weights<'v>(a: &'v DiscreteView, b: &DiscreteView) -> Result<Option<&'v Weights>> {
    if a.n_samples() != b.n_samples() {
        return Err(Error::LengthMismatch {
            left: a.n_samples(),
            right: b.n_samples(),
        });
    }
    match (a.weights(), b.weights()) {
        (None, None) => Ok(None),
        (Some(wa), Some(wb)) if wa.same_as(wb) => Ok(Some(wa)),
        _ => Err(Error::WeightMismatch),
    }
}

/// Probability mass per symbol, accumulated in sample order.
pub(crate) fn symbol_masses(symbols: &[u32], alphabet: usize, weights: Option<&Weights>) -> Vec<f64> {
    let mut masses = vec![0.0; alphabet];
    match weights {
        Some(w) => {
            for (&s, &m) in symbols.iter().zip(w.as_slice()) {
                masses[s as usize] += m;
            }
        }
        None => {
            let m = uniform_mass(symbols.len());
            for &s in symbols {
                masses[s as usize] += m;
            }
        }
    }
    masses
}

pub(crate) fn entropy_of_masses(masses: &[f64]) -> f64 {
    // a single observed symbol carries all the mass, whatever rounding says
    if masses.iter().filter(|&&p| p > 0.0).count() <= 1 {
        return 0.0;
    }
    let h: f64 = masses
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.max(0.0)
}

pub(crate) fn pair_symbols(a: &DiscreteView, b: &DiscreteView) -> (Vec<u32>, usize) {
    let ka = a.alphabet_size();
    let kb = b.alphabet_size();
    let mut next = 0u32;
    let mut out = Vec::with_capacity(a.n_samples());
    match ka.checked_mul(kb) {
        Some(cells) if cells <= DENSE_PAIR_LIMIT => {
            let mut table = vec![u32::MAX; cells];
            for (&x, &y) in a.symbols().iter().zip(b.symbols()) {
                let slot = &mut table[x as usize * kb + y as usize];
                if *slot == u32::MAX {
                    *slot = next;
                    next += 1;
                }
                out.push(*slot);
            }
        }
        _ => {
            let mut table: HashMap<(u32, u32), u32> = HashMap::new();
            for (&x, &y) in a.symbols().iter().zip(b.symbols()) {
                let id = *table.entry((x, y)).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                out.push(id);
            }
        }
    }
    (out, next as usize)
}
