use std::path::PathBuf;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::datagen::{SimpleFunction, SynergyFunction, DEFAULT_SAMPLES, DEFAULT_TEST_RANGE};
use crate::nets::{AttackSpec, LossKind, NetSpec, OutputHead, TrainSpec};
use crate::objectives::{Beta, ObjectiveKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SyntheticSynergy,
    SimpleFunctions,
    ActivationPlane,
    AdversarialMnist,
    Custom,
}

/// Which hidden layer IB probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IbLayer {
    #[default]
    Final,
    Index(usize),
}

impl Serialize for IbLayer {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IbLayer::Final => s.serialize_str("final"),
            IbLayer::Index(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for IbLayer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(usize),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(k) => Ok(IbLayer::Index(k)),
            Raw::Name(n) if n == "final" => Ok(IbLayer::Final),
            Raw::Name(n) => Err(D::Error::custom(format!(
                "ib_layer must be \"final\" or a layer index, got `{n}`"
            ))),
        }
    }
}

impl IbLayer {
    /// Resolves against a network with `n_hidden` hidden layers.
    pub fn resolve(self, n_hidden: usize) -> Result<usize> {
        match self {
            IbLayer::Final if n_hidden > 0 => Ok(n_hidden - 1),
            IbLayer::Index(k) if k < n_hidden => Ok(k),
            _ => Err(Error::config(
                "ib_layer",
                format!("network has {n_hidden} hidden layers"),
            )),
        }
    }
}

/// Value range used to bin hidden activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenRange {
    /// Per-column observed min/max.
    Observed,
    /// The activation's bounded output interval (tanh: (-1, 1)); observed
    /// range for unbounded activations.
    #[default]
    ActivationBounds,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_test_range() -> (f64, f64) {
    DEFAULT_TEST_RANGE
}

fn default_unit() -> f64 {
    1.0
}

fn default_p_flip() -> f64 {
    1.0 / 3.0
}

fn default_synergy_samples() -> usize {
    1_000_000
}

/// Data source of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum DatasetParams {
    SimpleFunction {
        function: SimpleFunction,
        #[serde(default = "default_samples")]
        n_train: usize,
        #[serde(default = "default_samples")]
        n_test: usize,
        /// Defaults to the function's training range.
        #[serde(default)]
        train_range: Option<(f64, f64)>,
        #[serde(default = "default_test_range")]
        test_range: (f64, f64),
        /// Inputs are divided by this and targets recomputed on the result.
        #[serde(default = "default_unit")]
        input_unit: f64,
        /// Fixed data seed; the run seed when absent.
        #[serde(default)]
        data_seed: Option<u64>,
    },
    BinaryClassification {
        #[serde(default)]
        data_seed: u64,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        /// Keep only the first `subset` samples.
        #[serde(default)]
        subset: Option<usize>,
        #[serde(default)]
        test_images: Option<PathBuf>,
        #[serde(default)]
        test_labels: Option<PathBuf>,
    },
    Csv {
        path: PathBuf,
        x_columns: Vec<String>,
        target: String,
        /// Integer class labels (otherwise a real target).
        #[serde(default)]
        classification: bool,
    },
    ForceToOne {
        #[serde(default = "default_p_flip")]
        p_flip: f64,
        n_values: Vec<usize>,
        #[serde(default = "default_synergy_samples")]
        n_samples: usize,
        #[serde(default)]
        functions: Option<Vec<SynergyFunction>>,
    },
}

fn default_probe_every() -> usize {
    10
}

fn default_n_bins() -> usize {
    30
}

fn default_objectives() -> Vec<ObjectiveKind> {
    vec![ObjectiveKind::Ib, ObjectiveKind::Gib]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Declarative description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub dataset: DatasetParams,
    #[serde(default)]
    pub net: Option<NetSpec>,
    /// The per-run seed replaces `train.seed`.
    #[serde(default)]
    pub train: Option<TrainSpec>,
    #[serde(default)]
    pub attack: Option<AttackSpec>,
    #[serde(default = "default_probe_every")]
    pub probe_every: usize,
    #[serde(default = "default_n_bins")]
    pub n_bins: usize,
    #[serde(default = "default_objectives")]
    pub objectives: Vec<ObjectiveKind>,
    #[serde(default)]
    pub beta: Beta,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub ib_layer: IbLayer,
    #[serde(default)]
    pub hidden_range: HiddenRange,
    /// Keep every `k`-th input feature for GIB / SVW.
    #[serde(default)]
    pub feature_subsample: Option<usize>,
    /// Marks a preset run at the published scale rather than desk scale.
    #[serde(default)]
    pub full_protocol: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("config")
                .to_string();
            Error::config(field, msg)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.probe_every == 0 {
            return Err(Error::config("probe_every", "must be at least 1"));
        }
        if self.n_bins < 2 {
            return Err(Error::config("n_bins", "must be at least 2"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "must not be empty"));
        }
        if self.feature_subsample == Some(0) {
            return Err(Error::config("feature_subsample", "stride must be at least 1"));
        }
        if let Some(a) = &self.attack {
            a.validate()?;
        }
        if let DatasetParams::ForceToOne {
            p_flip, n_values, ..
        } = &self.dataset
        {
            if self.experiment != ExperimentKind::SyntheticSynergy {
                return Err(Error::config(
                    "dataset",
                    "force_to_one data is only used by the synthetic_synergy experiment",
                ));
            }
            if !(0.0..=1.0).contains(p_flip) {
                return Err(Error::config("dataset.p_flip", "must lie in [0, 1]"));
            }
            if n_values.is_empty() || n_values.iter().any(|&n| n == 0 || n > 16) {
                return Err(Error::config("dataset.n_values", "each n must lie in 1..=16"));
            }
            return Ok(());
        }
        if self.experiment == ExperimentKind::SyntheticSynergy {
            return Err(Error::config(
                "dataset",
                "synthetic_synergy needs a force_to_one dataset",
            ));
        }
        if self.objectives.is_empty() {
            return Err(Error::config("objectives", "must not be empty"));
        }
        let net = self
            .net
            .as_ref()
            .ok_or_else(|| Error::config("net", "required for training experiments"))?;
        net.validate()?;
        let train = self
            .train
            .as_ref()
            .ok_or_else(|| Error::config("train", "required for training experiments"))?;
        train.validate()?;
        if train.loss == LossKind::CrossEntropy && net.head != OutputHead::Softmax {
            return Err(Error::config(
                "net.head",
                "cross-entropy training needs a softmax head",
            ));
        }
        if self.objectives.contains(&ObjectiveKind::Ib) {
            self.ib_layer.resolve(net.hidden.len())?;
        }
        if let DatasetParams::SimpleFunction { input_unit, .. } = &self.dataset {
            if !(input_unit.is_finite() && *input_unit > 0.0) {
                return Err(Error::config("dataset.input_unit", "must be positive"));
            }
        }
        Ok(())
    }

    /// Canonical JSON of the whole config (object keys sorted).
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// Hex SHA-256 of [`ExperimentConfig::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
