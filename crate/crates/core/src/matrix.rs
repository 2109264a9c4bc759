use std::collections::HashSet;

use ndarray::{Array2, ArrayView2, Axis};

use crate::{Error, Result};

/// Real-valued sample matrix (rows are samples) with named columns.
///
/// Holds raw inputs, hidden activations or network outputs before binning.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    values: Array2<f64>,
    column_names: Vec<String>,
}

impl SampleMatrix {
    pub fn new(values: Array2<f64>, column_names: Vec<String>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::Shape("sample matrix needs at least one row".into()));
        }
        if column_names.len() != values.ncols() {
            return Err(Error::Shape(format!(
                "{} column names for {} columns",
                column_names.len(),
                values.ncols()
            )));
        }
        let mut seen = HashSet::with_capacity(column_names.len());
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Shape(format!("duplicate column name `{name}`")));
            }
        }
        if let Some((row, column)) = first_non_finite(values.view()) {
            return Err(Error::NonFinite { row, column });
        }
        Ok(SampleMatrix {
            values,
            column_names,
        })
    }

    /// Builds a matrix with generated column names `{prefix}{1..=n}`.
    pub fn with_prefix(values: Array2<f64>, prefix: &str) -> Result<Self> {
        let names = (1..=values.ncols()).map(|i| format!("{prefix}{i}")).collect();
        SampleMatrix::new(values, names)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<SampleMatrix> {
        for &c in columns {
            if c >= self.n_columns() {
                return Err(Error::ColumnOutOfRange {
                    index: c,
                    n_columns: self.n_columns(),
                });
            }
        }
        let values = self.values.select(Axis(1), columns);
        let names = columns.iter().map(|&c| self.column_names[c].clone()).collect();
        SampleMatrix::new(values, names)
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<SampleMatrix> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_samples()) {
            return Err(Error::Shape(format!(
                "row {bad} out of range for {} rows",
                self.n_samples()
            )));
        }
        SampleMatrix::new(
            self.values.select(Axis(0), rows),
            self.column_names.clone(),
        )
    }
}

pub(crate) fn first_non_finite(values: ArrayView2<'_, f64>) -> Option<(usize, usize)> {
    values
        .indexed_iter()
        .find(|(_, v)| !v.is_finite())
        .map(|(idx, _)| idx)
}
