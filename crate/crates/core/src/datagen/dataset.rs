use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::nets::Targets;
use crate::{Error, Result, SampleMatrix};

/// Regression targets or class labels.
#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Real(Vec<f64>),
    Classes { labels: Vec<usize>, n_classes: usize },
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Real(v) => v.len(),
            Labels::Classes { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, i: usize) -> f64 {
        match self {
            Labels::Real(v) => v[i],
            Labels::Classes { labels, .. } => labels[i] as f64,
        }
    }

    pub fn to_targets(&self) -> Targets {
        match self {
            Labels::Real(v) => Targets::Real(Array2::from_shape_vec((v.len(), 1), v.clone()).expect("column shape")),
            Labels::Classes { labels, n_classes } => Targets::Classes {
                labels: labels.clone(),
                n_classes: *n_classes,
            },
        }
    }

    pub fn select(&self, rows: &[usize]) -> Labels {
        match self {
            Labels::Real(v) => Labels::Real(rows.iter().map(|&r| v[r]).collect()),
            Labels::Classes { labels, n_classes } => Labels::Classes {
                labels: rows.iter().map(|&r| labels[r]).collect(),
                n_classes: *n_classes,
            },
        }
    }
}

/// Where a dataset came from: generator name, its parameters and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(generator: &str, seed: Option<u64>) -> Self {
        Provenance {
            generator: generator.to_string(),
            params: BTreeMap::new(),
            seed,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("serializable parameter");
        self.params.insert(key.to_string(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: SampleMatrix,
    pub y: Labels,
    pub meta: Provenance,
}

impl LabeledDataset {
    pub fn new(x: SampleMatrix, y: Labels, meta: Provenance) -> Result<Self> {
        if x.n_samples() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.n_samples(),
                right: y.len(),
            });
        }
        if meta.generator.is_empty() {
            return Err(Error::InvalidArgument("provenance needs a generator name".into()));
        }
        if let Labels::Classes { labels, n_classes } = &y {
            if let Some(&l) = labels.iter().find(|&&l| l >= *n_classes) {
                return Err(Error::InvalidArgument(format!("label {l} outside [0, {n_classes})")));
            }
        }
        Ok(LabeledDataset { x, y, meta })
    }

    pub fn n_samples(&self) -> usize {
        self.x.n_samples()
    }

    /// Keeps the given rows in order; provenance records the selection size.
    pub fn select_rows(&self, rows: &[usize]) -> Result<LabeledDataset> {
        let meta = self.meta.clone().param("rows_selected", rows.len());
        LabeledDataset::new(self.x.select_rows(rows)?, self.y.select(rows), meta)
    }

    /// Feature columns followed by `target_name`.
    pub fn to_table(&self, target_name: &str) -> (Vec<String>, Array2<f64>) {
        let mut header = self.x.column_names().to_vec();
        header.push(target_name.to_string());
        let n = self.x.n_columns();
        let table = Array2::from_shape_fn((self.n_samples(), n + 1), |(r, c)| {
            if c < n {
                self.x.values()[[r, c]]
            } else {
                self.y.value(r)
            }
        });
        (header, table)
    }
}

/// Sidecar path for a CSV export: `data.csv` → `data.csv.provenance.json`.
pub fn provenance_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".provenance.json");
    PathBuf::from(name)
}

/// Writes a header row and numeric rows, plus the provenance sidecar.
pub fn write_csv(path: &Path, header: &[String], rows: ArrayView2<'_, f64>, meta: &Provenance) -> Result<()> {
    if header.len() != rows.ncols() {
        return Err(Error::Shape(format!("{} names for {} columns", header.len(), rows.ncols())));
    }
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows.rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    let sidecar = provenance_path(path);
    let mut json = serde_json::to_string_pretty(meta)?;
    json.push('\n');
    fs::write(&sidecar, json).map_err(|e| Error::io(&sidecar, e))
}

/// Reads a numeric CSV with a header row.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(csv_err)?;
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!(
                    "{}: line {}, column `{}`: `{field}` is not a number",
                    path.display(),
                    i + 2,
                    header[j]
                ))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let table = Array2::from_shape_vec((rows, header.len()), values).map_err(|e| Error::Shape(e.to_string()))?;
    Ok((header, table))
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn length_mismatch_rejected() {
        let x = SampleMatrix::with_prefix(array![[1.0], [2.0]], "x").unwrap();
        assert!(LabeledDataset::new(x, Labels::Real(vec![1.0]), Provenance::new("t", None)).is_err());
    }

    #[test]
    fn csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let x = SampleMatrix::new(array![[2.0, 3.0], [0.5, -1.0]], vec!["a".into(), "b".into()]).unwrap();
        let d = LabeledDataset::new(x, Labels::Real(vec![5.0, -0.5]), Provenance::new("add", Some(4)).param("n", 2)).unwrap();
        let (h, t) = d.to_table("target");
        write_csv(&path, &h, t.view(), &d.meta).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b,target\n2,3,5\n0.5,-1,-0.5\n");
        let meta: Provenance = serde_json::from_str(&fs::read_to_string(provenance_path(&path)).unwrap()).unwrap();
        assert_eq!(meta, d.meta);
        let (h2, t2) = read_csv(&path).unwrap();
        assert_eq!((h2, t2), (h, t));
    }
}
