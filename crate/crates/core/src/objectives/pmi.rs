use crate::estimators::{pair_view, DiscreteView, Weights};
use crate::{Error, Result};

/// The prediction/label pair stream reweighted by pointwise mutual
/// information: each sample carries weight proportional to
/// `p(z, y) / (p(z) p(y))` under the empirical distribution.
#[derive(Debug, Clone)]
pub struct PmiWeightedJoint {
    pair_view: DiscreteView,
    raw_ratios: Vec<f64>,
}

impl PmiWeightedJoint {
    /// `(z, y)` pair symbols carrying the normalized PMI-ratio weights.
    pub fn pair_view(&self) -> &DiscreteView {
        &self.pair_view
    }

    pub fn weights(&self) -> &Weights {
        self.pair_view.weights().expect("pmi joint is always weighted")
    }

    /// Per-sample `p(z, y) / (p(z) p(y))`.
    pub fn raw_ratios(&self) -> &[f64] {
        &self.raw_ratios
    }
}

/// Builds `Q(Z, Y)` from two unweighted streams of equal length.
///
/// Ratios are only evaluated at observed pairs, so every marginal in the
/// denominator is strictly positive.
pub fn pmi_reweight(z: &DiscreteView, y: &DiscreteView) -> Result<PmiWeightedJoint> {
    if z.weights().is_some() || y.weights().is_some() {
        return Err(Error::InvalidArgument(
            "pmi reweighting expects unweighted streams".into(),
        ));
    }
    let pairs = pair_view(z, y)?;
    let n = z.n_samples();
    let counts = |symbols: &[u32], k: usize| {
        let mut c = vec![0u64; k];
        symbols.iter().for_each(|&s| c[s as usize] += 1);
        c
    };
    let cz = counts(z.symbols(), z.alphabet_size());
    let cy = counts(y.symbols(), y.alphabet_size());
    let czy = counts(pairs.symbols(), pairs.alphabet_size());

    // (c_zy / n) / ((c_z / n)(c_y / n)) = n c_zy / (c_z c_y)
    let raw_ratios: Vec<f64> = (0..n)
        .map(|i| {
            let num = n as f64 * czy[pairs.symbols()[i] as usize] as f64;
            let den = cz[z.symbols()[i] as usize] as f64 * cy[y.symbols()[i] as usize] as f64;
            num / den
        })
        .collect();
    let weights = Weights::from_unnormalized(&raw_ratios)?;
    Ok(PmiWeightedJoint {
        pair_view: pairs.with_weights(weights)?,
        raw_ratios,
    })
}
