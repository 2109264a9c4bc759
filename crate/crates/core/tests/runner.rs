mod common;

use std::fs;
use std::path::Path;

use infoplane::datagen::{SimpleFunction, SynergyFunction};
use infoplane::nets::{ActivationKind, AttackSpec, Batch, LossKind, NetSpec, Optimizer, OutputHead, TrainSpec, WeightInit};
use infoplane::objectives::{Beta, ObjectiveKind};
use infoplane::runner::{
    normalize_trajectory, parse_trajectory_csv, presets, run_experiment, DatasetParams, ExperimentConfig,
    ExperimentKind, HiddenRange, IbLayer, Manifest, RunStatus, SYNERGY_TABLE_FILE,
};

fn quiet(_: &str) {}

fn with_output(mut c: ExperimentConfig, dir: &Path) -> ExperimentConfig {
    c.output_dir = dir.to_path_buf();
    c
}

/// Writes a classification CSV: `k` one-hot inputs, `reps` copies of each class.
fn one_hot_csv(dir: &Path, k: usize, reps: usize) -> std::path::PathBuf {
    let path = dir.join("onehot.csv");
    let mut text: String = (0..k).map(|j| format!("x{j},")).collect();
    text.push_str("label\n");
    for r in 0..k * reps {
        let c = r % k;
        for j in 0..k {
            text.push_str(if j == c { "1," } else { "0," });
        }
        text.push_str(&format!("{c}\n"));
    }
    fs::write(&path, text).unwrap();
    path
}

fn classifier_config(csv: &Path, k: usize, epochs: usize) -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentKind::Custom,
        dataset: DatasetParams::Csv {
            path: csv.to_path_buf(),
            x_columns: (0..k).map(|j| format!("x{j}")).collect(),
            target: "label".into(),
            classification: true,
        },
        net: Some(NetSpec {
            input: k,
            hidden: vec![8],
            output: k,
            activation: ActivationKind::Tanh,
            head: OutputHead::Softmax,
            bias: true,
        }),
        train: Some(TrainSpec {
            optimizer: Optimizer::Adam { lr: 0.05 },
            epochs,
            batch: Batch::Full,
            loss: LossKind::CrossEntropy,
            seed: 0,
            weight_init: WeightInit::DefaultUniformFanIn,
        }),
        attack: None,
        probe_every: 10,
        n_bins: 30,
        objectives: vec![ObjectiveKind::Ib, ObjectiveKind::Gib, ObjectiveKind::Svw],
        beta: Beta::ONE,
        seeds: vec![0],
        ib_layer: IbLayer::Final,
        hidden_range: HiddenRange::ActivationBounds,
        feature_subsample: None,
        full_protocol: false,
        output_dir: "unused".into(),
    }
}

#[test]
fn addition_probe_grid_and_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = with_output(presets::simple_functions(SimpleFunction::Add), dir.path());
    c.seeds = vec![0];
    let result = run_experiment(&c, Some(1), &quiet).unwrap();
    assert!(result.manifest.all_completed());
    assert_eq!(result.trajectories.len(), 2);
    for t in &result.trajectories {
        assert_eq!(t.points.len(), 100);
        assert_eq!(t.points.last().unwrap().epoch, 1000);
        let n = normalize_trajectory(t).unwrap();
        let ext = (t.prediction_extent().unwrap(), t.complexity_extent().unwrap());
        for (p, &(pn, cn)) in t.points.iter().zip(n.normalized.as_ref().unwrap()) {
            assert!((0.0..=1.0).contains(&pn) && (0.0..=1.0).contains(&cn));
            assert!((ext.0.unscale(pn) - p.prediction_term).abs() < 1e-9);
            assert!((ext.1.unscale(cn) - p.complexity_term).abs() < 1e-9);
        }
        assert!(t.points.iter().all(|p| p.test_loss.is_finite()));
    }
    let rec = &result.manifest.trajectories[0];
    let text = fs::read_to_string(dir.path().join(&rec.file)).unwrap();
    let rows = parse_trajectory_csv(&text).unwrap();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.pred_norm) && (0.0..=1.0).contains(&r.cplx_norm)));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = tempfile::tempdir().unwrap();
    let csv = one_hot_csv(data.path(), 4, 10);
    let mut c = with_output(classifier_config(&csv, 4, 60), dir.path());
    c.seeds = vec![0, 1, 2];
    let snapshot = |dir: &Path| {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap())
            .filter(|e| e.file_name() != "manifest.json")
            .map(|e| (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap()))
            .collect();
        files.sort();
        files
    };
    run_experiment(&c, Some(1), &quiet).unwrap();
    let (first_files, mut first) = (snapshot(dir.path()), Manifest::read(dir.path()).unwrap());
    run_experiment(&c, Some(3), &quiet).unwrap();
    let (second_files, mut second) = (snapshot(dir.path()), Manifest::read(dir.path()).unwrap());
    assert_eq!(first_files.len(), 9);
    assert_eq!(first_files, second_files);
    assert_eq!(first.config_hash, second.config_hash);
    first.timing.wall_seconds = 0.0;
    second.timing.wall_seconds = 0.0;
    assert_eq!(first, second);
}

#[test]
fn memorizer_ib_prediction_reaches_label_entropy() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let csv = one_hot_csv(data.path(), 4, 25);
    let c = with_output(classifier_config(&csv, 4, 200), out.path());
    let result = run_experiment(&c, None, &quiet).unwrap();
    let ib = result.trajectories.iter().find(|t| t.kind == ObjectiveKind::Ib).unwrap();
    let last = ib.points.last().unwrap();
    assert!(last.train_loss < 0.05, "{}", last.train_loss);
    assert!((last.prediction_term - 2.0).abs() < 1e-12, "{}", last.prediction_term);
    // T is a function of X, so I(X;T) = H(T) = H(Y) once classes separate
    assert!((last.complexity_term - 2.0).abs() < 1e-12);
    assert!(result.trajectories.iter().any(|t| t.kind == ObjectiveKind::Svw));
}

#[test]
fn zero_epsilon_matches_clean_run() {
    let data = tempfile::tempdir().unwrap();
    let csv = one_hot_csv(data.path(), 3, 8);
    let clean_dir = tempfile::tempdir().unwrap();
    let adv_dir = tempfile::tempdir().unwrap();
    let clean = with_output(classifier_config(&csv, 3, 40), clean_dir.path());
    let mut adv = with_output(classifier_config(&csv, 3, 40), adv_dir.path());
    adv.attack = Some(AttackSpec { epsilon: 0.0, clip: true });
    let a = run_experiment(&clean, None, &quiet).unwrap();
    let b = run_experiment(&adv, None, &quiet).unwrap();
    // test loss is NaN without a test split, so compare renderings rather than values
    assert_eq!(format!("{:?}", a.trajectories), format!("{:?}", b.trajectories));
    for rec in &a.manifest.trajectories {
        assert_eq!(
            fs::read(clean_dir.path().join(&rec.file)).unwrap(),
            fs::read(adv_dir.path().join(&rec.file)).unwrap()
        );
    }
}

#[test]
fn divergence_is_flagged_with_partial_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = with_output(presets::simple_functions(SimpleFunction::Mul), dir.path());
    c.seeds = vec![0];
    c.probe_every = 1;
    if let DatasetParams::SimpleFunction { input_unit, .. } = &mut c.dataset {
        *input_unit = 1.0;
    }
    let result = run_experiment(&c, None, &quiet).unwrap();
    let run = &result.manifest.runs[0];
    let RunStatus::Diverged { epoch } = run.status else {
        panic!("{:?}", run.status);
    };
    assert!(!result.manifest.all_completed());
    for t in &result.trajectories {
        assert_eq!(t.points.len(), epoch - 1);
    }
}

#[test]
fn synergy_table_through_runner() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = with_output(presets::synthetic_synergy(), dir.path());
    c.dataset = DatasetParams::ForceToOne {
        p_flip: 1.0 / 3.0,
        n_values: vec![2, 3],
        n_samples: 100_000,
        functions: None,
    };
    let result = run_experiment(&c, None, &quiet).unwrap();
    assert!(result.trajectories.is_empty());
    assert_eq!(result.manifest.extra_outputs, vec![SYNERGY_TABLE_FILE.to_string()]);
    let text = fs::read_to_string(dir.path().join(SYNERGY_TABLE_FILE)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("seed,n,function,i_eps_exact,i_x_exact,i_eps_sampled,i_x_sampled")
    );
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let v: Vec<f64> = r[3..].iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[0] - v[2]).abs() < 0.01 && (v[1] - v[3]).abs() < 0.01, "{r:?}");
    }
    let names: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(names, ["f1", "f2", "f3", "f1", "f2", "f3"]);
    assert_eq!(SynergyFunction::ALL.len(), 3);
}

#[test]
fn feature_subsample_is_recorded() {
    let data = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let csv = one_hot_csv(data.path(), 4, 5);
    let mut c = with_output(classifier_config(&csv, 4, 20), out.path());
    c.feature_subsample = Some(2);
    let result = run_experiment(&c, None, &quiet).unwrap();
    assert_eq!(result.manifest.config.feature_subsample, Some(2));
    assert!(result.manifest.all_completed());
}
