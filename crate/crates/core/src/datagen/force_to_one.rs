use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::estimators::ExactPmf;
use crate::{Error, Result};

/// Largest input width accepted by [`enumerate_force_to_one`].
pub const MAX_ENUMERATED_WIDTH: usize = 16;

/// Force-to-1 corruption: with probability `p_flip` one uniformly chosen
/// coordinate of an `n`-bit input is set to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p_flip: f64,
    pub n: usize,
}

impl NoiseSpec {
    pub fn new(p_flip: f64, n: usize) -> Result<Self> {
        let spec = NoiseSpec { p_flip, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_flip) {
            return Err(Error::InvalidArgument(format!(
                "p_flip {} outside [0, 1]",
                self.p_flip
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("input width n must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sampled force-to-1 data. `eps` is 0 for an untouched sample and `i` when
/// coordinate `i` (1-based) was forced to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceToOneSample {
    pub x_clean: Array2<u32>,
    pub x_noisy: Array2<u32>,
    pub eps: Vec<u32>,
}

impl ForceToOneSample {
    /// Column names `x1..xn, x1'..xn', eps`.
    pub fn header(n: usize) -> Vec<String> {
        let mut h: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        h.extend((1..=n).map(|i| format!("x{i}'")));
        h.push("eps".into());
        h
    }

    /// Rows in [`ForceToOneSample::header`] order.
    pub fn to_table(&self) -> Array2<f64> {
        let n = self.x_clean.ncols();
        let rows = self.eps.len();
        Array2::from_shape_fn((rows, 2 * n + 1), |(r, c)| {
            if c < n {
                f64::from(self.x_clean[[r, c]])
            } else if c < 2 * n {
                f64::from(self.x_noisy[[r, c - n]])
            } else {
                f64::from(self.eps[r])
            }
        })
    }
}

pub fn gen_force_to_one(noise: NoiseSpec, n_samples: usize, seed: u64) -> Result<ForceToOneSample> {
    noise.validate()?;
    let n = noise.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x_clean = Array2::<u32>::zeros((n_samples, n));
    let mut eps = vec![0u32; n_samples];
    for r in 0..n_samples {
        for c in 0..n {
            x_clean[[r, c]] = u32::from(rng.random::<bool>());
        }
        if rng.random::<f64>() < noise.p_flip {
            eps[r] = rng.random_range(1..=n as u32);
        }
    }
    let mut x_noisy = x_clean.clone();
    for (r, &e) in eps.iter().enumerate() {
        if e > 0 {
            x_noisy[[r, e as usize - 1]] = 1;
        }
    }
    Ok(ForceToOneSample {
        x_clean,
        x_noisy,
        eps,
    })
}

/// Exact joint pmf of `(x_clean[0..n], x_noisy[0..n], eps)` as a
/// `2n + 1`-coordinate table with `2^n (n + 1)` outcomes.
pub fn enumerate_force_to_one(noise: NoiseSpec) -> Result<ExactPmf> {
    noise.validate()?;
    let n = noise.n;
    if n > MAX_ENUMERATED_WIDTH {
        return Err(Error::InvalidArgument(format!(
            "n = {n} exceeds the enumeration limit {MAX_ENUMERATED_WIDTH}"
        )));
    }
    let p_input = 0.5f64.powi(n as i32);
    let mut support = Vec::with_capacity((1 << n) * (n + 1));
    let mut probs = Vec::with_capacity(support.capacity());
    for x in 0..1u32 << n {
        let clean: Vec<u32> = (0..n).map(|j| (x >> j) & 1).collect();
        for e in 0..=n {
            let mut noisy = clean.clone();
            let p = if e == 0 {
                1.0 - noise.p_flip
            } else {
                noisy[e - 1] = 1;
                noise.p_flip / n as f64
            };
            let mut t = clean.clone();
            t.extend_from_slice(&noisy);
            t.push(e as u32);
            support.push(t);
            probs.push(p_input * p);
        }
    }
    ExactPmf::new(support, probs)
}

/// The three reference functions of increasing synergy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynergyFunction {
    /// first input
    F1,
    /// XOR of the first two inputs
    F2,
    /// XOR of all inputs
    F3,
}

impl SynergyFunction {
    pub const ALL: [SynergyFunction; 3] = [SynergyFunction::F1, SynergyFunction::F2, SynergyFunction::F3];

    pub fn eval(self, row: &[u32]) -> u32 {
        match self {
            SynergyFunction::F1 => row[0] & 1,
            SynergyFunction::F2 => (row[0] ^ row[1]) & 1,
            SynergyFunction::F3 => row.iter().fold(0, |acc, &b| acc ^ b) & 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SynergyFunction::F1 => "f1",
            SynergyFunction::F2 => "f2",
            SynergyFunction::F3 => "f3",
        }
    }
}

/// Applies a synergy function to every row of a binary matrix.
pub fn apply_synergy_function(x_noisy: ArrayView2<'_, u32>, which: SynergyFunction) -> Result<Vec<u32>> {
    if which == SynergyFunction::F2 && x_noisy.ncols() < 2 {
        return Err(Error::InvalidArgument("f2 needs at least two inputs".into()));
    }
    if x_noisy.ncols() == 0 {
        return Err(Error::InvalidArgument("no input columns".into()));
    }
    Ok(x_noisy
        .rows()
        .into_iter()
        .map(|r| which.eval(&r.to_vec()))
        .collect())
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::estimators::exact_mi;

    #[test]
    fn no_flip_keeps_inputs() {
        let s = gen_force_to_one(NoiseSpec::new(0.0, 4).unwrap(), 500, 1).unwrap();
        assert_eq!(s.x_clean, s.x_noisy);
        assert!(s.eps.iter().all(|&e| e == 0));
    }

    #[test]
    fn single_coordinate_forced_to_one() {
        let s = gen_force_to_one(NoiseSpec::new(1.0, 1).unwrap(), 200, 2).unwrap();
        assert!(s.x_noisy.iter().all(|&b| b == 1));
        assert!(s.eps.iter().all(|&e| e == 1));
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = NoiseSpec::new(1.0 / 3.0, 5).unwrap();
        assert_eq!(gen_force_to_one(spec, 100, 9).unwrap(), gen_force_to_one(spec, 100, 9).unwrap());
    }

    #[test]
    fn enumeration_sums_to_one_with_uniform_inputs() {
        let pmf = enumerate_force_to_one(NoiseSpec::new(1.0 / 3.0, 3).unwrap()).unwrap();
        assert_eq!(pmf.support().len(), 8 * 4);
        assert!((pmf.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let clean = pmf.marginal(&[0, 1, 2]).unwrap();
        assert_eq!(clean.support().len(), 8);
        assert!(clean.probs().iter().all(|&p| (p - 0.125).abs() < 1e-15));
    }

    #[test]
    fn width_limit() {
        assert!(enumerate_force_to_one(NoiseSpec::new(0.5, 17).unwrap()).is_err());
    }

    #[test]
    fn first_input_depends_more_on_noise_than_parity() {
        let n = 3;
        let pmf = enumerate_force_to_one(NoiseSpec::new(1.0 / 3.0, n).unwrap()).unwrap();
        let noisy = n..2 * n;
        let with = |f: SynergyFunction| {
            let cols: Vec<usize> = noisy.clone().collect();
            pmf.with_derived(move |t| f.eval(&cols.iter().map(|&c| t[c]).collect::<Vec<_>>()))
        };
        let i1 = exact_mi(&with(SynergyFunction::F1), &[2 * n + 1], &[2 * n]).unwrap();
        let i3 = exact_mi(&with(SynergyFunction::F3), &[2 * n + 1], &[2 * n]).unwrap();
        assert!(i1 > i3, "{i1} vs {i3}");
    }

    #[test]
    fn synergy_functions_by_definition() {
        let x = array![[0, 0, 0], [1, 0, 1]];
        let f = |w| apply_synergy_function(x.view(), w).unwrap();
        assert_eq!(f(SynergyFunction::F1), vec![0, 1]);
        assert_eq!(f(SynergyFunction::F2), vec![0, 1]);
        assert_eq!(f(SynergyFunction::F3), vec![0, 0]);
        let two = array![[0, 1], [1, 1], [1, 0], [0, 0]];
        assert_eq!(
            apply_synergy_function(two.view(), SynergyFunction::F2).unwrap(),
            apply_synergy_function(two.view(), SynergyFunction::F3).unwrap()
        );
        let one = array![[1], [0]];
        assert!(apply_synergy_function(one.view(), SynergyFunction::F2).is_err());
    }
}
