use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use super::config::{DatasetParams, ExperimentConfig, HiddenRange};
use super::emit::{emit, format_sig9, Manifest, RunRecord, RunStatus};
use super::trajectory::{InfoTrajectory, TrajectoryPoint};
use crate::datagen::{
    apply_synergy_function, enumerate_force_to_one, gen_binary_classification,
    gen_force_to_one, gen_simple_function, load_idx, read_csv, rescale_inputs, LabeledDataset,
    Labels, NoiseSpec, Provenance, SynergyFunction,
};
use crate::estimators::{
    bin_equal_width, bin_values, exact_mi, joint_view, mutual_information, BinnedMatrix,
    BinningSpec, DiscreteView,
};
use crate::nets::{
    train_with, ActivationKind, DenseNet, LossKind, NetSpec, TrainSpec, TrainStatus,
};
use crate::objectives::{gib_terms, ib_terms, svw_terms, ObjectiveKind, ObjectiveReport};
use crate::{Error, Result, SampleMatrix};

pub const SYNERGY_TABLE_FILE: &str = "synergy.csv";

/// Trajectories plus the manifest written for them.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub trajectories: Vec<InfoTrajectory>,
    pub manifest: Manifest,
}

/// Runs every seed of `config` (at most `jobs` at a time), then writes the
/// trajectory CSVs and manifest to `config.output_dir`. `progress` receives
/// one line per finished seed.
pub fn run_experiment(
    config: &ExperimentConfig,
    jobs: Option<usize>,
    progress: &(dyn Fn(&str) + Sync),
) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    if let DatasetParams::ForceToOne { .. } = config.dataset {
        return run_synergy_table(config, start, progress);
    }

    let results: Vec<Result<(Vec<InfoTrajectory>, RunRecord)>> = pool.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| {
                let outcome = run_seed(config, seed);
                if let Ok((_, record)) = &outcome {
                    progress(&progress_line(record));
                }
                outcome
            })
            .collect()
    });

    let mut trajectories = Vec::new();
    let mut runs = Vec::new();
    for r in results {
        let (t, record) = r?;
        trajectories.extend(t);
        runs.push(record);
    }
    let manifest = emit(
        config,
        &trajectories,
        runs,
        Vec::new(),
        &config.output_dir,
        start.elapsed().as_secs_f64(),
    )?;
    Ok(ExperimentResult {
        trajectories,
        manifest,
    })
}

fn progress_line(r: &RunRecord) -> String {
    let status = match &r.status {
        RunStatus::Completed => "completed".to_string(),
        RunStatus::Diverged { epoch } => format!("diverged at epoch {epoch}"),
        RunStatus::Failed { error } => format!("failed: {error}"),
    };
    let loss = r.final_train_loss.map_or("n/a".to_string(), |l| format!("{l:.6}"));
    format!("seed {}: {status}, {} epochs, final train loss {loss}", r.seed, r.epochs_run)
}

/// Train and (optional) test data for one seed.
pub struct PreparedData {
    pub train: LabeledDataset,
    pub test: Option<LabeledDataset>,
}

/// Builds the datasets a config describes for the given run seed.
pub fn prepare_data(params: &DatasetParams, seed: u64) -> Result<PreparedData> {
    match params {
        DatasetParams::SimpleFunction {
            function,
            n_train,
            n_test,
            train_range,
            test_range,
            input_unit,
            data_seed,
        } => {
            let s = data_seed.unwrap_or(seed);
            let range = train_range.unwrap_or_else(|| function.train_range());
            let train = gen_simple_function(*function, *n_train, range, s)?;
            // distinct stream for the test draw
            let test = gen_simple_function(*function, *n_test, *test_range, s ^ 0x7e57_7e57)?;
            Ok(PreparedData {
                train: rescale_inputs(&train, *function, *input_unit)?,
                test: Some(rescale_inputs(&test, *function, *input_unit)?),
            })
        }
        DatasetParams::BinaryClassification { data_seed } => Ok(PreparedData {
            train: gen_binary_classification(*data_seed)?,
            test: None,
        }),
        DatasetParams::Idx {
            images,
            labels,
            subset,
            test_images,
            test_labels,
        } => {
            let mut train = load_idx(images, labels)?;
            if let Some(k) = subset {
                if *k < train.n_samples() {
                    train = train.select_rows(&(0..*k).collect::<Vec<_>>())?;
                }
            }
            let test = match (test_images, test_labels) {
                (Some(i), Some(l)) => Some(load_idx(i, l)?),
                (None, None) => None,
                _ => {
                    return Err(Error::config(
                        "dataset.test_images",
                        "test_images and test_labels must be given together",
                    ))
                }
            };
            Ok(PreparedData { train, test })
        }
        DatasetParams::Csv {
            path,
            x_columns,
            target,
            classification,
        } => Ok(PreparedData {
            train: csv_dataset(path, x_columns, target, *classification)?,
            test: None,
        }),
        DatasetParams::ForceToOne { .. } => Err(Error::config(
            "dataset",
            "force_to_one data has no training split",
        )),
    }
}

fn csv_dataset(path: &Path, x_columns: &[String], target: &str, classification: bool) -> Result<LabeledDataset> {
    let (header, table) = read_csv(path)?;
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::config("dataset.x_columns", format!("no column `{name}` in {}", path.display())))
    };
    let cols = x_columns.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;
    let t = find(target)?;
    let x = SampleMatrix::new(
        table.select(ndarray::Axis(1), &cols),
        x_columns.to_vec(),
    )?;
    let raw: Vec<f64> = table.column(t).to_vec();
    let y = if classification {
        let labels = raw
            .iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::config("dataset.target", format!("class label {v} is not a non-negative integer")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let n_classes = labels.iter().max().map_or(1, |&m| m + 1);
        Labels::Classes { labels, n_classes }
    } else {
        Labels::Real(raw)
    };
    let meta = Provenance::new("csv", None).param("path", path.display().to_string());
    LabeledDataset::new(x, y, meta)
}

/// Discretized views that stay fixed over a run.
struct ProbeContext {
    /// Input features for GIB / SVW (after subsampling).
    features: BinnedMatrix,
    /// All inputs as one symbol stream for IB.
    inputs: DiscreteView,
    labels: DiscreteView,
    ib_layer: usize,
    hidden_spec: BinningSpec,
    n_bins: usize,
}

fn label_view(y: &Labels, n_bins: usize) -> Result<DiscreteView> {
    match y {
        Labels::Classes { labels, .. } => DiscreteView::from_values(labels),
        Labels::Real(v) => {
            let m = Array2::from_shape_vec((v.len(), 1), v.clone()).map_err(|e| Error::Shape(e.to_string()))?;
            let (b, _) = bin_values(m.view(), &BinningSpec::observed(n_bins))?;
            joint_view(&b, &[0])
        }
    }
}

fn hidden_binning(range: HiddenRange, activation: ActivationKind, width: usize, n_bins: usize) -> BinningSpec {
    match (range, activation.output_range()) {
        (HiddenRange::ActivationBounds, Some((lo, hi))) => BinningSpec::fixed_uniform(n_bins, lo, hi, width),
        _ => BinningSpec::observed(n_bins),
    }
}

fn all_columns(b: &BinnedMatrix) -> Vec<usize> {
    (0..b.n_columns()).collect()
}

impl ProbeContext {
    fn new(config: &ExperimentConfig, net: &NetSpec, data: &LabeledDataset) -> Result<Self> {
        let n_bins = config.n_bins;
        let (binned, _) = bin_equal_width(&data.x, &BinningSpec::observed(n_bins))?;
        let inputs = joint_view(&binned, &all_columns(&binned))?;
        let features = match config.feature_subsample {
            Some(k) if k > 1 => {
                let keep: Vec<usize> = (0..binned.n_columns()).step_by(k).collect();
                binned.select_columns(&keep)?
            }
            _ => binned,
        };
        let needs_pairs = config.objectives.contains(&ObjectiveKind::Gib);
        if needs_pairs && features.n_columns() < 2 {
            return Err(Error::config("objectives", "GIB needs at least two input features"));
        }
        let ib_layer = if config.objectives.contains(&ObjectiveKind::Ib) {
            config.ib_layer.resolve(net.hidden.len())?
        } else {
            0
        };
        let width = net.hidden.get(ib_layer).copied().unwrap_or(0);
        Ok(ProbeContext {
            features,
            inputs,
            labels: label_view(&data.y, n_bins)?,
            ib_layer,
            hidden_spec: hidden_binning(config.hidden_range, net.activation, width, n_bins),
            n_bins,
        })
    }

    fn measure(&self, kinds: &[ObjectiveKind], config: &ExperimentConfig, pass_logits: &Array2<f64>, hidden: &[Array2<f64>]) -> Result<Vec<ObjectiveReport>> {
        let (zb, _) = bin_values(pass_logits.view(), &BinningSpec::observed(self.n_bins))?;
        let z = joint_view(&zb, &all_columns(&zb))?;
        kinds
            .iter()
            .map(|kind| match kind {
                ObjectiveKind::Gib => {
                    let r = gib_terms(&self.features, &z, &self.labels, config.beta)?;
                    let expected = 2 * self.features.n_columns() + 1;
                    if r.mi_evaluations != expected {
                        return Err(Error::InvalidArgument(format!(
                            "GIB probe used {} MI evaluations, expected {expected}",
                            r.mi_evaluations
                        )));
                    }
                    Ok(r)
                }
                ObjectiveKind::Svw => svw_terms(&self.features, &z, &self.labels, config.beta),
                ObjectiveKind::Ib => {
                    let (tb, _) = bin_values(hidden[self.ib_layer].view(), &self.hidden_spec)?;
                    let t = joint_view(&tb, &all_columns(&tb))?;
                    ib_terms(&self.inputs, &t, &self.labels, config.beta)
                }
            })
            .collect()
    }
}

/// Trains one seed and records its trajectories.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<(Vec<InfoTrajectory>, RunRecord)> {
    let net_spec = config.net.clone().ok_or_else(|| Error::config("net", "missing"))?;
    let spec = TrainSpec {
        seed,
        ..config.train.clone().ok_or_else(|| Error::config("train", "missing"))?
    };
    let data = prepare_data(&config.dataset, seed)?;
    let train = &data.train;
    if net_spec.input != train.x.n_columns() {
        return Err(Error::config(
            "net.input",
            format!("dataset has {} input columns, net expects {}", train.x.n_columns(), net_spec.input),
        ));
    }
    match (&train.y, spec.loss) {
        (Labels::Real(_), LossKind::CrossEntropy) => {
            return Err(Error::config("train.loss", "cross-entropy needs class labels"))
        }
        (Labels::Classes { .. }, LossKind::Mse) => {
            return Err(Error::config("train.loss", "mse needs a real-valued target"))
        }
        _ => {}
    }

    let failed = |e: Error| {
        Ok((
            Vec::new(),
            RunRecord {
                seed,
                status: RunStatus::Failed { error: e.to_string() },
                epochs_run: 0,
                final_train_loss: None,
            },
        ))
    };
    let ctx = match ProbeContext::new(config, &net_spec, train) {
        Ok(c) => c,
        Err(e @ Error::Config { .. }) => return Err(e),
        Err(e) => return failed(e),
    };
    let net = DenseNet::init(&net_spec, &mut spec.init_rng())?;
    let targets = train.y.to_targets();
    let test = data.test.as_ref().map(|t| (t.x.values().clone(), t.y.to_targets()));
    let probe_epochs = (1..=spec.epochs).filter(|e| e % config.probe_every == 0).collect();
    let kinds = config.objectives.clone();

    let outcome = train_with(
        net,
        train.x.values().view(),
        &targets,
        &spec,
        config.attack.as_ref(),
        &probe_epochs,
        |ev| {
            let pass = ev.net.forward_pass(train.x.values().view())?;
            // activations can overflow a step before the loss does
            let finite = |a: &ndarray::Array2<f64>| a.iter().all(|v| v.is_finite());
            if !finite(pass.logits()) || !pass.hidden().iter().all(finite) {
                return Ok((ev.epoch, None));
            }
            let reports = ctx.measure(&kinds, config, pass.logits(), pass.hidden())?;
            let test_loss = match &test {
                Some((x, t)) => ev.net.loss(x.view(), t, spec.loss)?,
                None => f64::NAN,
            };
            Ok((ev.epoch, Some((ev.train_loss, test_loss, reports))))
        },
    );
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return failed(e),
    };

    let mut trajectories: Vec<InfoTrajectory> = kinds.iter().map(|&k| InfoTrajectory::new(k, seed)).collect();
    let mut overflow_epoch = None;
    for (epoch, probe) in &outcome.probes {
        let Some((train_loss, test_loss, reports)) = probe else {
            overflow_epoch = Some(*epoch);
            break;
        };
        for (t, r) in trajectories.iter_mut().zip(reports) {
            t.push(TrajectoryPoint {
                epoch: *epoch,
                prediction_term: r.prediction_term,
                complexity_term: r.complexity_term,
                train_loss: *train_loss,
                test_loss: *test_loss,
            })?;
        }
    }
    let loss_epoch = match outcome.status {
        TrainStatus::Diverged { epoch } => Some(epoch),
        TrainStatus::Completed => None,
    };
    let status = match loss_epoch.into_iter().chain(overflow_epoch).min() {
        Some(epoch) => RunStatus::Diverged { epoch },
        None => RunStatus::Completed,
    };
    Ok((
        trajectories,
        RunRecord {
            seed,
            status,
            epochs_run: outcome.loss_history.len(),
            final_train_loss: outcome.loss_history.last().copied(),
        },
    ))
}

/// One row of the force-to-1 dependence table.
#[derive(Debug, Clone, PartialEq)]
pub struct SynergyRow {
    pub seed: u64,
    pub n: usize,
    pub function: SynergyFunction,
    /// `I(f(X'); eps)`, exact.
    pub noise_exact: f64,
    /// `I(f(X'); X)`, exact.
    pub input_exact: f64,
    pub noise_sampled: f64,
    pub input_sampled: f64,
}

/// Exact and sampled dependence of each function of the corrupted input on
/// the noise label and on the clean input.
pub fn synergy_rows(noise: NoiseSpec, functions: &[SynergyFunction], n_samples: usize, seed: u64) -> Result<Vec<SynergyRow>> {
    let n = noise.n;
    let pmf = enumerate_force_to_one(noise)?;
    let sample = gen_force_to_one(noise, n_samples, seed)?;
    let clean = BinnedMatrix::from_symbols(sample.x_clean.clone())?;
    let clean_view = joint_view(&clean, &all_columns(&clean))?;
    let eps_view = DiscreteView::from_values(&sample.eps)?;
    let noisy_cols: Vec<usize> = (n..2 * n).collect();
    let clean_cols: Vec<usize> = (0..n).collect();
    functions
        .iter()
        .filter(|&&f| !(f == SynergyFunction::F2 && n < 2))
        .map(|&f| {
            let cols = noisy_cols.clone();
            let ext = pmf.with_derived(move |t| f.eval(&cols.iter().map(|&c| t[c]).collect::<Vec<_>>()));
            let out = DiscreteView::from_values(&apply_synergy_function(sample.x_noisy.view(), f)?)?;
            Ok(SynergyRow {
                seed,
                n,
                function: f,
                noise_exact: exact_mi(&ext, &[2 * n + 1], &[2 * n])?,
                input_exact: exact_mi(&ext, &[2 * n + 1], &clean_cols)?,
                noise_sampled: mutual_information(&out, &eps_view)?,
                input_sampled: mutual_information(&out, &clean_view)?,
            })
        })
        .collect()
}

fn run_synergy_table(config: &ExperimentConfig, start: Instant, progress: &(dyn Fn(&str) + Sync)) -> Result<ExperimentResult> {
    let DatasetParams::ForceToOne {
        p_flip,
        n_values,
        n_samples,
        functions,
    } = &config.dataset
    else {
        unreachable!("checked by caller")
    };
    let functions = functions.clone().unwrap_or_else(|| SynergyFunction::ALL.to_vec());
    let mut text = String::from("seed,n,function,i_eps_exact,i_x_exact,i_eps_sampled,i_x_sampled\n");
    let mut runs = Vec::new();
    for &seed in &config.seeds {
        for &n in n_values {
            for r in synergy_rows(NoiseSpec::new(*p_flip, n)?, &functions, *n_samples, seed)? {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.seed,
                    r.n,
                    r.function.name(),
                    format_sig9(r.noise_exact),
                    format_sig9(r.input_exact),
                    format_sig9(r.noise_sampled),
                    format_sig9(r.input_sampled)
                ));
            }
        }
        let record = RunRecord {
            seed,
            status: RunStatus::Completed,
            epochs_run: 0,
            final_train_loss: None,
        };
        progress(&progress_line(&record));
        runs.push(record);
    }
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(SYNERGY_TABLE_FILE);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    let manifest = emit(config, &[], runs, vec![SYNERGY_TABLE_FILE.to_string()], dir, start.elapsed().as_secs_f64())?;
    Ok(ExperimentResult {
        trajectories: Vec::new(),
        manifest,
    })
}
