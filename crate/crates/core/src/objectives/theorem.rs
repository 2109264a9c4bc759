use std::collections::HashMap;

use super::terms::{gib_terms, ib_terms, Beta, ObjectiveReport};
use crate::estimators::{joint_view, BinnedMatrix, DiscreteView};
use crate::{Error, Result};

/// Slack allowed on `IB <= GIB`.
pub const THEOREM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Check {
    /// `I(T;Y) - I(X;T)/beta` with `T = Z`.
    pub lhs: f64,
    /// GIB objective at the same beta.
    pub rhs: f64,
    pub holds: bool,
    pub ib: ObjectiveReport,
    pub gib: ObjectiveReport,
}

/// Evaluates both sides of the IB-below-GIB inequality on a finite instance.
///
/// The instance must satisfy the hypothesis: the predictor output `z` equals
/// the label `y` on every sample and is a deterministic function of the
/// feature tuple. The representation is taken to be `z` itself.
pub fn check_theorem1(x: &BinnedMatrix, y: &[u32], z: &[u32], beta: Beta) -> Result<Theorem1Check> {
    if y.len() != x.n_samples() || z.len() != x.n_samples() {
        return Err(Error::LengthMismatch {
            left: x.n_samples(),
            right: y.len().max(z.len()),
        });
    }
    if let Some(i) = (0..y.len()).find(|&i| y[i] != z[i]) {
        return Err(Error::HypothesisViolated(format!(
            "prediction {} differs from label {} at sample {i}",
            z[i], y[i]
        )));
    }
    let all: Vec<usize> = (0..x.n_columns()).collect();
    let xv = joint_view(x, &all)?;
    let mut seen: HashMap<u32, u32> = HashMap::new();
    for (i, (&row, &out)) in xv.symbols().iter().zip(z).enumerate() {
        let first = *seen.entry(row).or_insert(out);
        if first != out {
            return Err(Error::HypothesisViolated(format!(
                "prediction is not a function of the input (sample {i})"
            )));
        }
    }
    let yv = DiscreteView::from_values(y)?;
    let zv = DiscreteView::from_values(z)?;
    let ib = ib_terms(&xv, &zv, &yv, beta)?;
    let gib = gib_terms(x, &zv, &yv, beta)?;
    let lhs = ib.objective_value;
    let rhs = gib.objective_value;
    Ok(Theorem1Check {
        lhs,
        rhs,
        holds: lhs <= rhs + THEOREM_TOLERANCE,
        ib,
        gib,
    })
}
