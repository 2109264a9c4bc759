use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::pmi::{pmi_reweight, PmiWeightedJoint};
use crate::estimators::{
    column_views, joint_view, leave_one_out_views, mutual_information, BinnedMatrix, DiscreteView,
};
use crate::{Error, Result};

/// Trade-off parameter; `+inf` drops the complexity term.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Beta(f64);

impl Beta {
    pub const ONE: Beta = Beta(1.0);
    pub const INFINITY: Beta = Beta(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && !value.is_nan() {
            Ok(Beta(value))
        } else {
            Err(Error::InvalidArgument(format!("beta must be positive, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `prediction - complexity / beta`, with no complexity contribution at infinity.
    pub fn objective(self, prediction: f64, complexity: f64) -> f64 {
        if self.is_infinite() {
            prediction
        } else {
            prediction - complexity / self.0
        }
    }
}

impl Default for Beta {
    fn default() -> Self {
        Beta::ONE
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Beta::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("invalid beta `{s}`")))
                .and_then(Beta::new),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Beta::new(v),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectiveKind {
    #[serde(rename = "IB", alias = "ib")]
    Ib,
    #[serde(rename = "GIB", alias = "gib")]
    Gib,
    #[serde(rename = "SVW", alias = "svw")]
    Svw,
}

impl ObjectiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Ib => "IB",
            ObjectiveKind::Gib => "GIB",
            ObjectiveKind::Svw => "SVW",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(I(X^{-i}; target), I(X^i; target))` for one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureTerms {
    pub leave_one_out: f64,
    pub single: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveReport {
    pub kind: ObjectiveKind,
    pub prediction_term: f64,
    /// Complexity term without the `1/beta` factor.
    pub complexity_term: f64,
    pub beta: Beta,
    pub objective_value: f64,
    /// Present for GIB and SVW, one entry per feature.
    pub per_feature_terms: Option<Vec<FeatureTerms>>,
    /// Number of MI estimates the report needed.
    pub mi_evaluations: usize,
}

/// Feature-wise synergy of a feature set about a target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynergyReport {
    /// `I(X; T) - (1/N) sum_i [I(X^{-i}; T) + I(X^i; T)]`
    pub synergy: f64,
    /// `I(X; T)`
    pub whole: f64,
    pub per_feature_terms: Vec<FeatureTerms>,
    pub mi_evaluations: usize,
}

impl SynergyReport {
    /// Mean over features of `I(X^{-i}; T) + I(X^i; T)`.
    pub fn mean_part_information(&self) -> f64 {
        let n = self.per_feature_terms.len() as f64;
        self.per_feature_terms
            .iter()
            .map(|t| t.leave_one_out + t.single)
            .sum::<f64>()
            / n
    }
}

/// Counts MI evaluations made through it.
#[derive(Debug, Default)]
pub struct MiCounter(AtomicUsize);

impl MiCounter {
    pub fn mi(&self, a: &DiscreteView, b: &DiscreteView) -> Result<f64> {
        self.0.fetch_add(1, Ordering::Relaxed);
        mutual_information(a, b)
    }

    pub fn count(&self) -> usize {
        self.0.load(Ordering::Relaxed)
    }
}

/// Views of one feature matrix measured against one (possibly weighted) target.
struct FeatureDecomposition {
    whole: DiscreteView,
    leave_one_out: Vec<DiscreteView>,
    single: Vec<DiscreteView>,
}

impl FeatureDecomposition {
    fn build(x: &BinnedMatrix, target: &DiscreteView, with_loo: bool) -> Result<Self> {
        if x.n_samples() != target.n_samples() {
            return Err(Error::LengthMismatch {
                left: x.n_samples(),
                right: target.n_samples(),
            });
        }
        let all: Vec<usize> = (0..x.n_columns()).collect();
        let attach = |v: DiscreteView| match target.weights() {
            Some(w) => v.with_weights(w.clone()),
            None => Ok(v),
        };
        let whole = attach(joint_view(x, &all)?)?;
        let leave_one_out = if with_loo {
            leave_one_out_views(x)?
                .into_iter()
                .map(attach)
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let single = column_views(x)
            .into_iter()
            .map(attach)
            .collect::<Result<_>>()?;
        Ok(FeatureDecomposition {
            whole,
            leave_one_out,
            single,
        })
    }
}

fn terms_against(
    d: &FeatureDecomposition,
    target: &DiscreteView,
    counter: &MiCounter,
) -> Result<(f64, Vec<FeatureTerms>)> {
    let whole = counter.mi(&d.whole, target)?;
    let per_feature = (0..d.single.len())
        .into_par_iter()
        .map(|i| {
            let leave_one_out = match d.leave_one_out.get(i) {
                Some(v) => counter.mi(v, target)?,
                None => 0.0,
            };
            let single = counter.mi(&d.single[i], target)?;
            Ok(FeatureTerms {
                leave_one_out,
                single,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((whole, per_feature))
}

fn require_features(x: &BinnedMatrix, needed: usize) -> Result<()> {
    if x.n_columns() < needed {
        return Err(Error::TooFewFeatures {
            needed,
            got: x.n_columns(),
        });
    }
    Ok(())
}

/// Synergy of the feature columns about `target`: the whole-set information
/// minus the mean over features of leave-one-out plus single-feature
/// information. When the target is weighted every term uses its weights.
pub fn feature_synergy(x: &BinnedMatrix, target: &DiscreteView) -> Result<SynergyReport> {
    require_features(x, 2)?;
    let d = FeatureDecomposition::build(x, target, true)?;
    let counter = MiCounter::default();
    let (whole, per_feature_terms) = terms_against(&d, target, &counter)?;
    let mut report = SynergyReport {
        synergy: 0.0,
        whole,
        per_feature_terms,
        mi_evaluations: counter.count(),
    };
    report.synergy = whole - report.mean_part_information();
    Ok(report)
}

/// Generalized IB terms against `Q = pmi_reweight(z, y)`.
///
/// Prediction term `I(X; Q)`, complexity term
/// `(1/2N) sum_i [I(X^{-i}; Q) + I(X^i; Q)]`; `2N + 1` MI evaluations.
pub fn gib_terms(
    x: &BinnedMatrix,
    z: &DiscreteView,
    y: &DiscreteView,
    beta: Beta,
) -> Result<ObjectiveReport> {
    require_features(x, 2)?;
    let q = pmi_reweight(z, y)?;
    gib_terms_against(x, &q, beta)
}

pub(crate) fn gib_terms_against(
    x: &BinnedMatrix,
    q: &PmiWeightedJoint,
    beta: Beta,
) -> Result<ObjectiveReport> {
    require_features(x, 2)?;
    let target = q.pair_view();
    let d = FeatureDecomposition::build(x, target, true)?;
    let counter = MiCounter::default();
    let (prediction, terms) = terms_against(&d, target, &counter)?;
    let n = terms.len() as f64;
    let complexity = terms
        .iter()
        .map(|t| t.leave_one_out + t.single)
        .sum::<f64>()
        / (2.0 * n);
    Ok(ObjectiveReport {
        kind: ObjectiveKind::Gib,
        prediction_term: prediction,
        complexity_term: complexity,
        beta,
        objective_value: beta.objective(prediction, complexity),
        per_feature_terms: Some(terms),
        mi_evaluations: counter.count(),
    })
}

/// Sum-versus-whole terms against `Q`: prediction `I(X; Q)`, complexity
/// `sum_i I(X^i; Q)` (no averaging). Accepts a single feature.
pub fn svw_terms(
    x: &BinnedMatrix,
    z: &DiscreteView,
    y: &DiscreteView,
    beta: Beta,
) -> Result<ObjectiveReport> {
    require_features(x, 1)?;
    let q = pmi_reweight(z, y)?;
    let target = q.pair_view();
    let d = FeatureDecomposition::build(x, target, false)?;
    let counter = MiCounter::default();
    let (prediction, terms) = terms_against(&d, target, &counter)?;
    let complexity = terms.iter().map(|t| t.single).sum();
    Ok(ObjectiveReport {
        kind: ObjectiveKind::Svw,
        prediction_term: prediction,
        complexity_term: complexity,
        beta,
        objective_value: beta.objective(prediction, complexity),
        per_feature_terms: Some(terms),
        mi_evaluations: counter.count(),
    })
}

/// Standard IB terms: prediction `I(T; Y)`, complexity `I(X; T)`.
pub fn ib_terms(
    x: &DiscreteView,
    t: &DiscreteView,
    y: &DiscreteView,
    beta: Beta,
) -> Result<ObjectiveReport> {
    let counter = MiCounter::default();
    let prediction = counter.mi(t, y)?;
    let complexity = counter.mi(x, t)?;
    Ok(ObjectiveReport {
        kind: ObjectiveKind::Ib,
        prediction_term: prediction,
        complexity_term: complexity,
        beta,
        objective_value: beta.objective(prediction, complexity),
        per_feature_terms: None,
        mi_evaluations: counter.count(),
    })
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;

    use super::*;
    use crate::estimators::entropy;

    fn bits(n: usize) -> BinnedMatrix {
        let rows: Vec<u32> = (0..1u32 << n)
            .flat_map(|x| (0..n).map(move |j| (x >> (n - 1 - j)) & 1))
            .collect();
        BinnedMatrix::from_symbols(Array2::from_shape_vec((1 << n, n), rows).unwrap()).unwrap()
    }

    fn target(x: &BinnedMatrix, f: impl Fn(&[u32]) -> u32) -> DiscreteView {
        let v: Vec<u32> = x.bins().rows().into_iter().map(|r| f(r.as_slice().unwrap())).collect();
        DiscreteView::from_values(&v).unwrap()
    }

    #[test]
    fn xor_synergy_is_one_bit() {
        let x = bits(2);
        let z = target(&x, |r| r[0] ^ r[1]);
        let s = feature_synergy(&x, &z).unwrap();
        assert_eq!(s.synergy, 1.0);
        assert_eq!(s.mi_evaluations, 5);
    }

    #[test]
    fn copy_synergy_is_zero() {
        let x = bits(2);
        let t = target(&x, |r| r[0]);
        let s = feature_synergy(&x, &t).unwrap();
        assert_eq!(s.synergy, 0.0);
        assert_eq!(s.per_feature_terms[0], FeatureTerms { leave_one_out: 0.0, single: 1.0 });
        assert_eq!(s.per_feature_terms[1], FeatureTerms { leave_one_out: 1.0, single: 0.0 });
    }

    #[test]
    fn three_way_parity_synergy() {
        let x = bits(3);
        let t = target(&x, |r| r[0] ^ r[1] ^ r[2]);
        assert_eq!(feature_synergy(&x, &t).unwrap().synergy, 1.0);
    }

    #[test]
    fn single_feature_rejected() {
        let x = bits(1);
        let t = target(&x, |r| r[0]);
        assert!(matches!(
            feature_synergy(&x, &t),
            Err(Error::TooFewFeatures { needed: 2, got: 1 })
        ));
        assert!(gib_terms(&x, &t, &t, Beta::ONE).is_err());
        assert!(svw_terms(&x, &t, &t, Beta::ONE).is_ok());
    }

    #[test]
    fn gib_on_xor() {
        let x = bits(2);
        let z = target(&x, |r| r[0] ^ r[1]);
        let r = gib_terms(&x, &z, &z, Beta::ONE).unwrap();
        assert_eq!(r.prediction_term, 1.0);
        assert_eq!(r.complexity_term, 0.0);
        assert_eq!(r.objective_value, 1.0);
        assert_eq!(r.mi_evaluations, 5);
        assert_eq!(r.per_feature_terms.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn svw_terms_by_enumeration() {
        let x = bits(2);
        let xor = target(&x, |r| r[0] ^ r[1]);
        let r = svw_terms(&x, &xor, &xor, Beta::ONE).unwrap();
        assert_eq!((r.prediction_term, r.complexity_term), (1.0, 0.0));
        let copy = target(&x, |r| r[0]);
        let r = svw_terms(&x, &copy, &copy, Beta::ONE).unwrap();
        assert_eq!(r.complexity_term, 1.0);
        let terms = r.per_feature_terms.unwrap();
        assert_eq!(terms[0], FeatureTerms { leave_one_out: 0.0, single: 1.0 });
        assert_eq!(terms[1], FeatureTerms { leave_one_out: 0.0, single: 0.0 });
    }

    #[test]
    fn svw_independent_features() {
        // x features and Q independent: Q depends on a column not in x
        let all = bits(3);
        let x = all.select_columns(&[0, 1]).unwrap();
        let q = target(&all, |r| r[2]);
        let r = svw_terms(&x, &q, &q, Beta::ONE).unwrap();
        assert_eq!(r.complexity_term, 0.0);
    }

    #[test]
    fn ib_endpoints() {
        let x = bits(2);
        let xv = joint_view(&x, &[0, 1]).unwrap();
        let y = target(&x, |r| r[0] & r[1]);
        let r = ib_terms(&xv, &y, &y, Beta::ONE).unwrap();
        assert_eq!(r.prediction_term, entropy(&y));
        // deterministic t = f(x): I(X;T) = H(T)
        assert!((r.complexity_term - entropy(&y)).abs() < 1e-15);
        let constant = target(&x, |_| 0);
        let r = ib_terms(&xv, &constant, &y, Beta::ONE).unwrap();
        assert_eq!((r.prediction_term, r.complexity_term), (0.0, 0.0));
    }

    #[test]
    fn beta_parsing_and_objective() {
        assert_eq!("inf".parse::<Beta>().unwrap(), Beta::INFINITY);
        assert_eq!("2".parse::<Beta>().unwrap().value(), 2.0);
        assert!("0".parse::<Beta>().is_err());
        assert_eq!(Beta::INFINITY.objective(1.5, 100.0), 1.5);
        assert_eq!(Beta::new(2.0).unwrap().objective(1.0, 1.0), 0.5);
        let json = serde_json::to_string(&Beta::INFINITY).unwrap();
        assert_eq!(json, "\"inf\"");
        let b: Beta = serde_json::from_str("0.5").unwrap();
        assert_eq!(b.value(), 0.5);
    }
}
