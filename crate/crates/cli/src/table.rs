use std::path::Path;

use infoplane::datagen::read_csv;
use infoplane::estimators::{bin_values, BinnedMatrix, BinningSpec, DiscreteView, Weights};
use infoplane::SampleMatrix;

use crate::Failure;

/// A CSV loaded for column lookup by name.
pub struct Table {
    data: SampleMatrix,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table, Failure> {
        let (header, values) = read_csv(path)?;
        Ok(Table {
            data: SampleMatrix::new(values, header)?,
        })
    }

    fn index(&self, name: &str) -> Result<usize, Failure> {
        self.data.column_index(name).ok_or_else(|| {
            Failure::Validation(format!(
                "no column `{name}` (columns: {})",
                self.data.column_names().join(", ")
            ))
        })
    }

    fn columns(&self, names: &[String]) -> Result<SampleMatrix, Failure> {
        let idx = names.iter().map(|n| self.index(n)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.data.select_columns(&idx)?)
    }

    /// Equal-width binning of the named columns over their observed ranges.
    pub fn binned(&self, names: &[String], bins: usize) -> Result<BinnedMatrix, Failure> {
        let m = self.columns(names)?;
        Ok(bin_values(m.values().view(), &BinningSpec::observed(bins))?.0)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, Failure> {
        let c = self.index(name)?;
        Ok(self.data.values().column(c).to_vec())
    }

    /// Distinct values of a column as symbols.
    pub fn categorical(&self, name: &str) -> Result<DiscreteView, Failure> {
        // -0.0 and 0.0 are the same category
        let bits: Vec<u64> = self
            .column(name)?
            .iter()
            .map(|&v| if v == 0.0 { 0 } else { v.to_bits() })
            .collect();
        Ok(DiscreteView::from_values(&bits)?)
    }

    pub fn weights(&self, name: &str) -> Result<Weights, Failure> {
        Ok(Weights::from_unnormalized(&self.column(name)?)?)
    }
}
