use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::trajectory::{
    compression_score, normalize_trajectory, shows_compression, Extent, InfoTrajectory,
    TrajectoryPoint,
};
use crate::objectives::ObjectiveKind;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "epoch,pred_term,cplx_term,pred_norm,cplx_norm,train_loss,test_loss";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Formats a float with 9 significant digits, choosing positional notation
/// for exponents in `[-5, 9)` and scientific notation otherwise. Trailing
/// zeros are dropped; non-finite values print as `nan`, `inf`, `-inf`.
pub fn format_sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if (-5..9).contains(&exp) {
        let (int, frac) = if exp >= 0 {
            let split = exp as usize + 1;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            ("0".to_string(), "0".repeat((-exp - 1) as usize) + &digits)
        };
        out.push_str(&int);
        let frac = frac.trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    } else {
        out.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push_str(&format!("e{exp}"));
    }
    out
}

/// Outcome of one seed's run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// Training hit a non-finite loss or probed activations overflowed;
    /// trajectories hold the probes before that epoch.
    Diverged { epoch: usize },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    #[serde(flatten)]
    pub status: RunStatus,
    pub epochs_run: usize,
    pub final_train_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub file: String,
    pub objective: ObjectiveKind,
    pub seed: u64,
    pub points: usize,
    /// Raw-term extents: `raw = min + norm * (max - min)`.
    pub prediction: Extent,
    pub complexity: Extent,
    pub compression_score: Option<f64>,
    pub shows_compression: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

/// Run summary written next to the trajectory CSVs. Everything except
/// `timing` is a pure function of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub crate_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunRecord>,
    pub trajectories: Vec<TrajectoryRecord>,
    /// Further files written by the experiment (e.g. tables).
    pub extra_outputs: Vec<String>,
    pub timing: Timing,
}

impl Manifest {
    pub fn all_completed(&self) -> bool {
        self.runs.iter().all(|r| r.status == RunStatus::Completed)
    }

    pub fn read(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn trajectory_file_name(kind: ObjectiveKind, seed: u64) -> String {
    format!("{}_seed{seed}.csv", kind.as_str().to_ascii_lowercase())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Renders one trajectory as CSV text (LF endings, 9 significant digits).
pub fn trajectory_csv(t: &InfoTrajectory) -> Result<String> {
    let normalized = match &t.normalized {
        Some(n) => n.clone(),
        None if t.points.is_empty() => Vec::new(),
        None => normalize_trajectory(t)?.normalized.expect("normalized"),
    };
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (p, (pn, cn)) in t.points.iter().zip(normalized) {
        let fields = [
            p.epoch.to_string(),
            format_sig9(p.prediction_term),
            format_sig9(p.complexity_term),
            format_sig9(pn),
            format_sig9(cn),
            format_sig9(p.train_loss),
            format_sig9(p.test_loss),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// A parsed trajectory CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub point: TrajectoryPoint,
    pub pred_norm: f64,
    pub cplx_norm: f64,
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidArgument("trajectory CSV header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::InvalidArgument(format!("malformed trajectory row {}", i + 2));
            if f.len() != 7 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(CsvRow {
                point: TrajectoryPoint {
                    epoch: f[0].parse().map_err(|_| bad())?,
                    prediction_term: num(f[1])?,
                    complexity_term: num(f[2])?,
                    train_loss: num(f[5])?,
                    test_loss: num(f[6])?,
                },
                pred_norm: num(f[3])?,
                cplx_norm: num(f[4])?,
            })
        })
        .collect()
}

/// Writes one CSV per trajectory plus `manifest.json` into `dir`.
pub fn emit(
    config: &ExperimentConfig,
    trajectories: &[InfoTrajectory],
    runs: Vec<RunRecord>,
    extra_outputs: Vec<String>,
    dir: &Path,
    wall_seconds: f64,
) -> Result<Manifest> {
    create_dir(dir)?;
    let mut records = Vec::with_capacity(trajectories.len());
    for t in trajectories {
        let file = trajectory_file_name(t.kind, t.seed);
        let normalized = if t.points.is_empty() {
            t.clone()
        } else {
            normalize_trajectory(t)?
        };
        write_file(&dir.join(&file), trajectory_csv(&normalized)?.as_bytes())?;
        let empty = Extent { min: 0.0, max: 0.0 };
        records.push(TrajectoryRecord {
            file,
            objective: t.kind,
            seed: t.seed,
            points: t.points.len(),
            prediction: t.prediction_extent().unwrap_or(empty),
            complexity: t.complexity_extent().unwrap_or(empty),
            compression_score: compression_score(t).ok(),
            shows_compression: shows_compression(t).ok(),
        });
    }
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        config: config.clone(),
        seeds: config.seeds.clone(),
        runs,
        trajectories: records,
        extra_outputs,
        timing: Timing { wall_seconds },
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write_file(&dir.join(MANIFEST_FILE), json.as_bytes())?;
    Ok(manifest)
}
