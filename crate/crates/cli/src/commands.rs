use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use infoplane::datagen::{
    gen_binary_classification, gen_force_to_one, gen_simple_function, write_csv, ForceToOneSample,
    NoiseSpec, Provenance, SimpleFunction,
};
use infoplane::estimators::{joint_view, mutual_information};
use infoplane::objectives::{feature_synergy, gib_terms, svw_terms, Beta, FeatureTerms};
use infoplane::runner::{run_experiment, ExperimentConfig, RunStatus};

use crate::table::Table;
use crate::{Failure, Kind};

const GENERATORS: [&str; 3] = ["simple_function", "binary_classification", "force_to_one"];

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

pub fn run(
    config: &Path,
    out: PathBuf,
    seeds: Option<Vec<u64>>,
    jobs: Option<usize>,
) -> Result<(), Failure> {
    let text = fs::read_to_string(config)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", config.display())))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    config.output_dir = out;
    if let Some(seeds) = seeds {
        config.seeds = seeds;
    }
    if jobs == Some(0) {
        return Err(invalid("--jobs must be at least 1"));
    }
    let result = run_experiment(&config, jobs, &|line: &str| println!("{line}"))?;
    for t in &result.manifest.trajectories {
        let score = t
            .compression_score
            .map_or("n/a".to_string(), |s| format!("{s:.6}"));
        println!("{} seed {} compression_score {score}", t.objective, t.seed);
    }
    let failed = result
        .manifest
        .runs
        .iter()
        .filter(|r| r.status != RunStatus::Completed)
        .count();
    if failed > 0 {
        return Err(Failure::Runtime(format!(
            "{failed} of {} runs did not complete",
            result.manifest.runs.len()
        )));
    }
    Ok(())
}

pub fn mi(
    input: &Path,
    x: &[String],
    y: &str,
    bins: usize,
    weights: Option<&str>,
) -> Result<(), Failure> {
    let table = Table::read(input)?;
    let xb = table.binned(x, bins)?;
    let all: Vec<usize> = (0..x.len()).collect();
    let mut xv = joint_view(&xb, &all)?;
    let mut yv = joint_view(&table.binned(&[y.to_string()], bins)?, &[0])?;
    if let Some(w) = weights {
        let w = table.weights(w)?;
        xv = xv.with_weights(w.clone())?;
        yv = yv.with_weights(w)?;
    }
    println!("{:.6}", mutual_information(&xv, &yv)?);
    Ok(())
}

fn feature_rows(names: &[String], terms: &[FeatureTerms], with_loo: bool) -> Vec<String> {
    let width = names.iter().map(String::len).max().unwrap_or(0).max("feature".len()) + 2;
    let mut rows = Vec::with_capacity(terms.len() + 1);
    if with_loo {
        rows.push(format!("{:<width$}{:<15}{}", "feature", "leave_one_out", "single"));
    } else {
        rows.push(format!("{:<width$}{}", "feature", "single"));
    }
    for (name, t) in names.iter().zip(terms) {
        if with_loo {
            rows.push(format!("{name:<width$}{:<15}{:.6}", format!("{:.6}", t.leave_one_out), t.single));
        } else {
            rows.push(format!("{name:<width$}{:.6}", t.single));
        }
    }
    rows
}

fn field(name: &str, value: impl std::fmt::Display) -> String {
    format!("{name:<12}{value}")
}

pub fn synergy(
    input: &Path,
    x: &[String],
    z: Option<&str>,
    y: &str,
    bins: usize,
    kind: Kind,
    beta: &str,
) -> Result<(), Failure> {
    let beta = Beta::from_str(beta)?;
    if kind == Kind::Gib && x.len() < 2 {
        return Err(invalid(format!("--kind gib needs at least 2 x-columns, got {}", x.len())));
    }
    let table = Table::read(input)?;
    let xb = table.binned(x, bins)?;
    let yv = table.categorical(y)?;
    let mut lines = Vec::new();
    if kind == Kind::Syn {
        let r = feature_synergy(&xb, &yv)?;
        lines.push(field("kind", "syn"));
        lines.push(field("synergy", format!("{:.6}", r.synergy)));
        lines.push(field("whole", format!("{:.6}", r.whole)));
        lines.extend(feature_rows(x, &r.per_feature_terms, true));
    } else {
        let z = z.ok_or_else(|| invalid("--z is required for --kind gib and svw"))?;
        let zv = table.categorical(z)?;
        let r = if kind == Kind::Gib {
            gib_terms(&xb, &zv, &yv, beta)?
        } else {
            svw_terms(&xb, &zv, &yv, beta)?
        };
        let beta = if beta.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.6}", beta.value())
        };
        lines.push(field("kind", if kind == Kind::Gib { "gib" } else { "svw" }));
        lines.push(field("beta", beta));
        lines.push(field("prediction", format!("{:.6}", r.prediction_term)));
        lines.push(field("complexity", format!("{:.6}", r.complexity_term)));
        lines.push(field("objective", format!("{:.6}", r.objective_value)));
        let terms = r.per_feature_terms.unwrap_or_default();
        lines.extend(feature_rows(x, &terms, kind == Kind::Gib));
    }
    for l in lines {
        println!("{}", l.trim_end());
    }
    Ok(())
}

/// `key=value` pairs; each key is consumed once by the generator.
struct Params(BTreeMap<String, String>);

impl Params {
    fn parse(raw: &[String]) -> Result<Params, Failure> {
        let mut map = BTreeMap::new();
        for p in raw.iter().filter(|p| !p.is_empty()) {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| invalid(format!("parameter `{p}` is not key=value")))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(invalid(format!("parameter `{k}` given twice")));
            }
        }
        Ok(Params(map))
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, Failure> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| invalid(format!("parameter `{key}`: cannot parse `{v}`"))),
        }
    }

    fn finish(self, generator: &str) -> Result<(), Failure> {
        match self.0.keys().next() {
            None => Ok(()),
            Some(k) => Err(invalid(format!("unknown parameter `{k}` for {generator}"))),
        }
    }
}

pub fn datagen(generator: &str, params: &[String], seed: u64, out: &Path) -> Result<(), Failure> {
    let mut p = Params::parse(params)?;
    let (header, rows, meta) = match generator {
        "simple_function" => {
            let name: String = p
                .take("function")?
                .ok_or_else(|| invalid("simple_function needs function=add|mul|sp1|sp2|sp3"))?;
            let which = SimpleFunction::from_str(&name)?;
            let n = p.take("n")?.unwrap_or(infoplane::datagen::DEFAULT_SAMPLES);
            let (lo, hi) = which.train_range();
            let range = (p.take("lo")?.unwrap_or(lo), p.take("hi")?.unwrap_or(hi));
            p.finish(generator)?;
            let d = gen_simple_function(which, n, range, seed)?;
            let (header, rows) = d.to_table("target");
            (header, rows, d.meta)
        }
        "binary_classification" => {
            p.finish(generator)?;
            let d = gen_binary_classification(seed)?;
            let (header, rows) = d.to_table("label");
            (header, rows, d.meta)
        }
        "force_to_one" => {
            let n = p.take("n")?.unwrap_or(3);
            let p_flip = p.take("p_flip")?.unwrap_or(1.0 / 3.0);
            let samples = p.take("samples")?.unwrap_or(10_000);
            p.finish(generator)?;
            let noise = NoiseSpec::new(p_flip, n)?;
            let s = gen_force_to_one(noise, samples, seed)?;
            let meta = Provenance::new("force_to_one", Some(seed))
                .param("n", n)
                .param("p_flip", p_flip)
                .param("n_samples", samples);
            (ForceToOneSample::header(n), s.to_table(), meta)
        }
        other => {
            return Err(invalid(format!(
                "unknown generator `{other}` (valid: {})",
                GENERATORS.join(", ")
            )))
        }
    };
    write_csv(out, &header, rows.view(), &meta)?;
    println!("wrote {} rows to {}", rows.nrows(), out.display());
    Ok(())
}
