use serde::{Deserialize, Serialize};

use crate::objectives::ObjectiveKind;
use crate::{Error, Result};

/// Fraction of the complexity range a trajectory must give back to count as
/// compressing.
pub const COMPRESSION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub epoch: usize,
    pub prediction_term: f64,
    pub complexity_term: f64,
    pub train_loss: f64,
    /// NaN when no test split exists.
    pub test_loss: f64,
}

/// One information-plane record: an objective's terms at each probe epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoTrajectory {
    pub kind: ObjectiveKind,
    pub seed: u64,
    pub points: Vec<TrajectoryPoint>,
    /// Min-max scaled `(prediction, complexity)` per point.
    pub normalized: Option<Vec<(f64, f64)>>,
}

/// Min and max of one term over a trajectory, kept for inverting the scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub min: f64,
    pub max: f64,
}

impl Extent {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Extent> {
        values.into_iter().fold(None, |acc, v| {
            Some(match acc {
                None => Extent { min: v, max: v },
                Some(e) => Extent {
                    min: e.min.min(v),
                    max: e.max.max(v),
                },
            })
        })
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    /// `(v - min) / (max - min)`, or 0 for a constant series.
    pub fn scale(&self, v: f64) -> f64 {
        let r = self.range();
        if r > 0.0 {
            ((v - self.min) / r).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn unscale(&self, s: f64) -> f64 {
        self.min + s * self.range()
    }
}

impl InfoTrajectory {
    pub fn new(kind: ObjectiveKind, seed: u64) -> Self {
        InfoTrajectory {
            kind,
            seed,
            points: Vec::new(),
            normalized: None,
        }
    }

    pub fn push(&mut self, point: TrajectoryPoint) -> Result<()> {
        if let Some(last) = self.points.last() {
            if point.epoch <= last.epoch {
                return Err(Error::InvalidArgument(format!(
                    "epoch {} does not follow {}",
                    point.epoch, last.epoch
                )));
            }
        }
        self.points.push(point);
        self.normalized = None;
        Ok(())
    }

    pub fn prediction_extent(&self) -> Option<Extent> {
        Extent::of(self.points.iter().map(|p| p.prediction_term))
    }

    pub fn complexity_extent(&self) -> Option<Extent> {
        Extent::of(self.points.iter().map(|p| p.complexity_term))
    }

    pub fn complexity_series(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.complexity_term).collect()
    }
}

/// Scales each term of the trajectory independently onto `[0, 1]`.
pub fn normalize_trajectory(t: &InfoTrajectory) -> Result<InfoTrajectory> {
    let (pe, ce) = match (t.prediction_extent(), t.complexity_extent()) {
        (Some(p), Some(c)) => (p, c),
        _ => return Err(Error::InvalidArgument("cannot normalize an empty trajectory".into())),
    };
    let mut out = t.clone();
    out.normalized = Some(
        t.points
            .iter()
            .map(|p| (pe.scale(p.prediction_term), ce.scale(p.complexity_term)))
            .collect(),
    );
    Ok(out)
}

/// `max(series) - last(series)` over a complexity series.
pub fn compression_score_of(series: &[f64]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "compression score needs at least 2 points, got {}",
            series.len()
        )));
    }
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(max - series[series.len() - 1])
}

/// Complexity given back after its peak: `max - final` over the probes.
pub fn compression_score(t: &InfoTrajectory) -> Result<f64> {
    compression_score_of(&t.complexity_series())
}

/// Score exceeds [`COMPRESSION_THRESHOLD`] of the complexity range.
pub fn shows_compression(t: &InfoTrajectory) -> Result<bool> {
    let score = compression_score(t)?;
    let range = t.complexity_extent().map_or(0.0, |e| e.range());
    Ok(score > COMPRESSION_THRESHOLD * range)
}
