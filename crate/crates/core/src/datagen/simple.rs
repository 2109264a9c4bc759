use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{LabeledDataset, Labels, Provenance};
use crate::{Error, Result, SampleMatrix};

pub const DEFAULT_SAMPLES: usize = 1500;
pub const DEFAULT_TRAIN_RANGE: (f64, f64) = (-10.0, 10.0);
pub const ADDITION_TRAIN_RANGE: (f64, f64) = (0.0, 10.0);
pub const DEFAULT_TEST_RANGE: (f64, f64) = (-1000.0, 1000.0);

const INPUT_NAMES: [&str; 4] = ["a", "b", "c", "d"];

/// Closed-form regression targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimpleFunction {
    /// a + b
    Add,
    /// a b
    Mul,
    /// ab + bc + ca
    Sp1,
    /// a² + b² + c²
    Sp2,
    /// ab + bc + cd + da
    Sp3,
}

impl SimpleFunction {
    pub const ALL: [SimpleFunction; 5] = [
        SimpleFunction::Add,
        SimpleFunction::Mul,
        SimpleFunction::Sp1,
        SimpleFunction::Sp2,
        SimpleFunction::Sp3,
    ];

    pub fn arity(self) -> usize {
        match self {
            SimpleFunction::Add | SimpleFunction::Mul => 2,
            SimpleFunction::Sp1 | SimpleFunction::Sp2 => 3,
            SimpleFunction::Sp3 => 4,
        }
    }

    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            SimpleFunction::Add => v[0] + v[1],
            SimpleFunction::Mul => v[0] * v[1],
            SimpleFunction::Sp1 => v[0] * v[1] + v[1] * v[2] + v[2] * v[0],
            SimpleFunction::Sp2 => v[0] * v[0] + v[1] * v[1] + v[2] * v[2],
            SimpleFunction::Sp3 => v[0] * v[1] + v[1] * v[2] + v[2] * v[3] + v[3] * v[0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SimpleFunction::Add => "add",
            SimpleFunction::Mul => "mul",
            SimpleFunction::Sp1 => "sp1",
            SimpleFunction::Sp2 => "sp2",
            SimpleFunction::Sp3 => "sp3",
        }
    }

    /// Training input range: `[0, 10]` for addition, `[-10, 10]` otherwise.
    pub fn train_range(self) -> (f64, f64) {
        match self {
            SimpleFunction::Add => ADDITION_TRAIN_RANGE,
            _ => DEFAULT_TRAIN_RANGE,
        }
    }
}

impl FromStr for SimpleFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimpleFunction::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown simple function `{s}` (add, mul, sp1, sp2, sp3)")))
    }
}

/// Inputs uniform on `range^arity`, target by the exact formula.
pub fn gen_simple_function(which: SimpleFunction, n_samples: usize, range: (f64, f64), seed: u64) -> Result<LabeledDataset> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!("invalid range ({lo}, {hi})")));
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
    }
    let k = which.arity();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_simple_fn((n_samples, k), || rng.random_range(lo..hi));
    let y = x.rows().into_iter().map(|r| which.eval(r.as_slice().expect("row-major"))).collect();
    let names = INPUT_NAMES[..k].iter().map(|s| s.to_string()).collect();
    let meta = Provenance::new("simple_function", Some(seed))
        .param("function", which)
        .param("n_samples", n_samples)
        .param("range", [lo, hi]);
    LabeledDataset::new(SampleMatrix::new(x, names)?, Labels::Real(y), meta)
}

/// Expresses the inputs in units of `unit` and recomputes the targets
/// exactly on the rescaled inputs: `x' = x / unit`, `y' = f(x')`.
pub fn rescale_inputs(d: &LabeledDataset, which: SimpleFunction, unit: f64) -> Result<LabeledDataset> {
    if !(unit.is_finite() && unit > 0.0) {
        return Err(Error::InvalidArgument(format!("input unit must be positive, got {unit}")));
    }
    if d.x.n_columns() != which.arity() {
        return Err(Error::Shape(format!("{} inputs for arity {}", d.x.n_columns(), which.arity())));
    }
    let x = d.x.values().mapv(|v| v / unit);
    let y = x.rows().into_iter().map(|r| which.eval(&r.to_vec())).collect();
    let meta = d.meta.clone().param("input_unit", unit);
    LabeledDataset::new(SampleMatrix::new(x, d.x.column_names().to_vec())?, Labels::Real(y), meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        assert_eq!(SimpleFunction::Add.eval(&[2.0, 3.0]), 5.0);
        assert_eq!(SimpleFunction::Mul.eval(&[2.0, 3.0]), 6.0);
        assert_eq!(SimpleFunction::Sp1.eval(&[1.0, 2.0, 3.0]), 11.0);
        assert_eq!(SimpleFunction::Sp2.eval(&[1.0, 2.0, 3.0]), 14.0);
        assert_eq!(SimpleFunction::Sp3.eval(&[1.0, 2.0, 3.0, 4.0]), 24.0);
    }

    #[test]
    fn inputs_within_range_and_named() {
        for f in SimpleFunction::ALL {
            let d = gen_simple_function(f, 300, f.train_range(), 1).unwrap();
            assert_eq!(d.x.n_columns(), f.arity());
            assert_eq!(d.x.column_names()[0], "a");
            let (lo, hi) = f.train_range();
            assert!(d.x.values().iter().all(|&v| (lo..hi).contains(&v)));
        }
    }

    #[test]
    fn pure_in_seed() {
        let a = gen_simple_function(SimpleFunction::Sp3, 50, DEFAULT_TEST_RANGE, 5).unwrap();
        let b = gen_simple_function(SimpleFunction::Sp3, 50, DEFAULT_TEST_RANGE, 5).unwrap();
        let c = gen_simple_function(SimpleFunction::Sp3, 50, DEFAULT_TEST_RANGE, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn rescaled_targets_are_exact() {
        let d = gen_simple_function(SimpleFunction::Mul, 20, DEFAULT_TRAIN_RANGE, 2).unwrap();
        let r = rescale_inputs(&d, SimpleFunction::Mul, 10.0).unwrap();
        for i in 0..20 {
            let (a, b) = (d.x.values()[[i, 0]] / 10.0, d.x.values()[[i, 1]] / 10.0);
            assert_eq!(r.y.value(i), a * b);
        }
        assert!(rescale_inputs(&d, SimpleFunction::Sp1, 10.0).is_err());
    }

    #[test]
    fn bad_range() {
        assert!(gen_simple_function(SimpleFunction::Add, 10, (1.0, 1.0), 0).is_err());
        assert!("pow".parse::<SimpleFunction>().is_err());
        assert_eq!("sp2".parse::<SimpleFunction>().unwrap(), SimpleFunction::Sp2);
    }
}
