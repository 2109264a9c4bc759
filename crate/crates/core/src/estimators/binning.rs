use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::matrix::first_non_finite;
use crate::{Error, Result, SampleMatrix};

/// How the equal-width bin range of each column is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangePolicy {
    /// Per-column observed min/max.
    Observed,
    /// One `(lo, hi)` interval per column.
    Fixed(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub n_bins: usize,
    pub range_policy: RangePolicy,
}

impl BinningSpec {
    pub fn observed(n_bins: usize) -> Self {
        BinningSpec {
            n_bins,
            range_policy: RangePolicy::Observed,
        }
    }

    /// The same interval for `n_columns` columns, e.g. `(-1, 1)` for tanh units.
    pub fn fixed_uniform(n_bins: usize, lo: f64, hi: f64, n_columns: usize) -> Self {
        BinningSpec {
            n_bins,
            range_policy: RangePolicy::Fixed(vec![(lo, hi); n_columns]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::InvalidBinning(format!(
                "n_bins must be at least 2, got {}",
                self.n_bins
            )));
        }
        if self.n_bins > u32::MAX as usize {
            return Err(Error::InvalidBinning("n_bins exceeds u32 range".into()));
        }
        if let RangePolicy::Fixed(intervals) = &self.range_policy {
            for (column, &(lo, hi)) in intervals.iter().enumerate() {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidInterval { column, lo, hi });
                }
            }
        }
        Ok(())
    }
}

/// Integer bin indices (rows are samples) with the alphabet size of each column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinnedMatrix {
    bins: Array2<u32>,
    alphabet_sizes: Vec<u32>,
}

impl BinnedMatrix {
    /// Wraps already-discrete data. Alphabet sizes are taken as `max + 1` per column.
    pub fn from_symbols(bins: Array2<u32>) -> Result<Self> {
        if bins.nrows() == 0 {
            return Err(Error::Shape("binned matrix needs at least one row".into()));
        }
        let alphabet_sizes = bins
            .axis_iter(Axis(1))
            .map(|col| col.iter().copied().max().unwrap_or(0) + 1)
            .collect();
        Ok(BinnedMatrix {
            bins,
            alphabet_sizes,
        })
    }

    pub fn bins(&self) -> ArrayView2<'_, u32> {
        self.bins.view()
    }

    pub fn column(&self, c: usize) -> ArrayView1<'_, u32> {
        self.bins.column(c)
    }

    pub fn n_samples(&self) -> usize {
        self.bins.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.bins.ncols()
    }

    /// Declared number of symbols per column (bins for binned data).
    pub fn alphabet_sizes(&self) -> &[u32] {
        &self.alphabet_sizes
    }

    pub fn select_columns(&self, columns: &[usize]) -> Result<BinnedMatrix> {
        for &c in columns {
            if c >= self.n_columns() {
                return Err(Error::ColumnOutOfRange {
                    index: c,
                    n_columns: self.n_columns(),
                });
            }
        }
        Ok(BinnedMatrix {
            bins: self.bins.select(Axis(1), columns),
            alphabet_sizes: columns.iter().map(|&c| self.alphabet_sizes[c]).collect(),
        })
    }

    /// Column-wise concatenation; row counts must agree.
    pub fn hstack(&self, other: &BinnedMatrix) -> Result<BinnedMatrix> {
        if self.n_samples() != other.n_samples() {
            return Err(Error::LengthMismatch {
                left: self.n_samples(),
                right: other.n_samples(),
            });
        }
        let bins = ndarray::concatenate(Axis(1), &[self.bins.view(), other.bins.view()])
            .map_err(|e| Error::Shape(e.to_string()))?;
        let mut alphabet_sizes = self.alphabet_sizes.clone();
        alphabet_sizes.extend_from_slice(&other.alphabet_sizes);
        Ok(BinnedMatrix {
            bins,
            alphabet_sizes,
        })
    }
}

/// Equal-width discretization of every column.
///
/// Each value maps to `floor(n_bins * (v - lo) / (hi - lo))` clamped to
/// `[0, n_bins - 1]`, so values at `hi` land in the last bin. A column that is
/// constant under the observed-range policy maps entirely to bin 0.
/// Returns the binned matrix and the `n_bins + 1` edges of each column.
pub fn bin_equal_width(
    data: &SampleMatrix,
    spec: &BinningSpec,
) -> Result<(BinnedMatrix, Vec<Vec<f64>>)> {
    bin_values(data.values().view(), spec)
}

/// Same as [`bin_equal_width`] on a raw array (rows are samples).
pub fn bin_values(
    values: ArrayView2<'_, f64>,
    spec: &BinningSpec,
) -> Result<(BinnedMatrix, Vec<Vec<f64>>)> {
    spec.validate()?;
    if let Some((row, column)) = first_non_finite(values) {
        return Err(Error::NonFinite { row, column });
    }
    let (n_rows, n_cols) = values.dim();
    if n_rows == 0 {
        return Err(Error::Shape("cannot bin an empty matrix".into()));
    }
    if let RangePolicy::Fixed(intervals) = &spec.range_policy {
        if intervals.len() != n_cols {
            return Err(Error::InvalidBinning(format!(
                "{} fixed intervals for {} columns",
                intervals.len(),
                n_cols
            )));
        }
    }

    let n_bins = spec.n_bins;
    let mut bins = Array2::<u32>::zeros((n_rows, n_cols));
    let mut edges = Vec::with_capacity(n_cols);
    for (c, column) in values.axis_iter(Axis(1)).enumerate() {
        let (lo, hi) = match &spec.range_policy {
            RangePolicy::Observed => column
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
            RangePolicy::Fixed(intervals) => intervals[c],
        };
        let width = hi - lo;
        edges.push(
            (0..=n_bins)
                .map(|k| lo + width * k as f64 / n_bins as f64)
                .collect(),
        );
        if width <= 0.0 {
            // constant column under the observed policy; bins are already zero
            continue;
        }
        let last = (n_bins - 1) as f64;
        for (r, &v) in column.iter().enumerate() {
            let b = (n_bins as f64 * (v - lo) / width).floor().clamp(0.0, last);
            bins[[r, c]] = b as u32;
        }
    }
    Ok((
        BinnedMatrix {
            bins,
            alphabet_sizes: vec![n_bins as u32; n_cols],
        },
        edges,
    ))
}

#[cfg(test)]
mod tests {
    use ndarray::{array, Array2};

    use super::*;

    fn column(values: &[f64]) -> SampleMatrix {
        let a = Array2::from_shape_vec((values.len(), 1), values.to_vec()).unwrap();
        SampleMatrix::with_prefix(a, "c").unwrap()
    }

    #[test]
    fn constant_column_maps_to_bin_zero() {
        let (b, _) = bin_equal_width(&column(&[3.0, 3.0, 3.0]), &BinningSpec::observed(30)).unwrap();
        assert!(b.column(0).iter().all(|&v| v == 0));
    }

    #[test]
    fn ten_values_five_bins() {
        let data: Vec<f64> = (0..10).map(f64::from).collect();
        let (b, edges) = bin_equal_width(&column(&data), &BinningSpec::observed(5)).unwrap();
        assert_eq!(b.column(0).to_vec(), vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
        assert_eq!(edges[0].len(), 6);
        assert_eq!(edges[0][0], 0.0);
        assert_eq!(edges[0][5], 9.0);
    }

    #[test]
    fn tanh_fixed_interval_thirty_bins() {
        let data = [-1.0, -0.999, 0.0, 0.5, 0.999_999, 1.0];
        let spec = BinningSpec::fixed_uniform(30, -1.0, 1.0, 1);
        let (b, _) = bin_equal_width(&column(&data), &spec).unwrap();
        assert_eq!(b.column(0).to_vec(), vec![0, 0, 15, 22, 29, 29]);
        assert_eq!(b.alphabet_sizes(), &[30]);
    }

    #[test]
    fn fixed_interval_clamps_out_of_range() {
        let spec = BinningSpec::fixed_uniform(4, 0.0, 1.0, 1);
        let (b, _) = bin_equal_width(&column(&[-5.0, 5.0]), &spec).unwrap();
        assert_eq!(b.column(0).to_vec(), vec![0, 3]);
    }

    #[test]
    fn rejects_non_finite_with_column() {
        let values = array![[0.0, 1.0], [0.0, f64::INFINITY]];
        let err = bin_values(values.view(), &BinningSpec::observed(4)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, column: 1 }));
    }

    #[test]
    fn rejects_inverted_interval() {
        let spec = BinningSpec::fixed_uniform(4, 1.0, 1.0, 1);
        let err = bin_equal_width(&column(&[0.5]), &spec).unwrap_err();
        assert!(matches!(err, Error::InvalidInterval { column: 0, .. }));
    }

    #[test]
    fn rejects_single_bin() {
        let err = bin_equal_width(&column(&[0.5]), &BinningSpec::observed(1)).unwrap_err();
        assert!(matches!(err, Error::InvalidBinning(_)));
    }
}
