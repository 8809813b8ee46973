//! `classikit` command-line driver.
//!
//! Exit codes: 0 on success, 2 for usage and configuration errors, 3 for
//! failures while computing.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use classikit::data::write_csv;
use classikit::evaluation::{apparent_error, error_std, feature_curve, learning_curve, Curve, FeatureSource};
use classikit::oracle::true_error;
use classikit::registry::{FitInfo, PipelineTrainer, TrainerSpec};
use classikit::{Error, Result, Seed};
use serde::Serialize;

use config::{load_problem, CurveSpec, ExperimentConfig, Source};

#[derive(Parser)]
#[command(name = "classikit", version, about = "Two-class classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a labeled dataset from a Gaussian problem.
    Gen(GenArgs),
    /// Train a model and write it with a training report.
    Train(Common),
    /// Run an error estimator.
    Eval(Common),
    /// Compute a learning or feature curve.
    Curve(Common),
    /// Compare several trainers under one estimator.
    Bench(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Config with "problem", "n" and optionally "seed" and "out".
    #[arg(long, conflicts_with = "problem")]
    config: Option<PathBuf>,
    /// Problem JSON file, instead of a config.
    #[arg(long, requires = "n")]
    problem: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Train(c) => with_config(c, cmd_train),
        Command::Eval(c) => with_config(c, cmd_eval),
        Command::Curve(c) => with_config(c, cmd_curve),
        Command::Bench(c) => with_config(c, cmd_bench),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("classikit: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}

fn with_config(c: Common, f: fn(&ExperimentConfig, Option<PathBuf>) -> Result<()>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    let out = c.out.or_else(|| cfg.out.as_ref().map(|p| cfg.resolve(p)));
    f(&cfg, out)
}

/// Writes `bytes` to `out`, or to stdout without a path.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, bytes)?;
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s.into_bytes()
}

/// `<out>` with `suffix` appended to the file name, e.g. `model.json` ->
/// `model.json.report.json`.
fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let (problem, n, seed, out) = match (&a.config, &a.problem) {
        (Some(path), _) => {
            let cfg = ExperimentConfig::load(path)?;
            let problem = cfg
                .problem()?
                .ok_or_else(|| Error::Argument("config needs a \"problem\"".into()))?;
            let n = a.n.map_or_else(|| cfg.require_n(), Ok)?;
            let out = a.out.clone().or_else(|| cfg.out.as_ref().map(|p| cfg.resolve(p)));
            (problem, n, a.seed.unwrap_or(cfg.seed), out)
        }
        (None, Some(p)) => (
            load_problem(p)?,
            a.n.expect("clap requires n with problem"),
            a.seed.unwrap_or(0),
            a.out.clone(),
        ),
        (None, None) => return Err(Error::Argument("gen needs --config or --problem".into())),
    };
    let ds = problem.sample(n, Seed(seed))?;
    let mut buf = Vec::new();
    write_csv(&ds, &mut buf)?;
    emit(out.as_deref(), &buf)
}

#[derive(Serialize)]
struct TrainReport {
    trainer: String,
    n: usize,
    dim: usize,
    apparent_error: f64,
    #[serde(flatten)]
    fit: FitInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    true_error: Option<f64>,
}

fn pipeline_trainer(cfg: &ExperimentConfig, spec: TrainerSpec, source: &Source) -> Result<PipelineTrainer> {
    let spec = match source {
        Source::Problem(p) => spec.with_problem(p),
        Source::Dataset(_) => spec,
    };
    Ok(PipelineTrainer {
        steps: cfg.transform_steps()?,
        spec,
    })
}

fn cmd_train(cfg: &ExperimentConfig, out: Option<PathBuf>) -> Result<()> {
    let source = cfg.source()?;
    let trainer = pipeline_trainer(cfg, cfg.trainer()?, &source)?;
    let ds = cfg.data(&source)?;
    let (file, fit, transformed) = trainer.fit(&ds, cfg.seed().derive(1))?;
    let true_error = match &source {
        Source::Problem(p) if file.transform.is_empty() => {
            Some(true_error(&file.model, p, cfg.n_test_mc(), cfg.seed().derive(2))?)
        }
        _ => None,
    };
    let report = TrainReport {
        trainer: trainer.spec.label(),
        n: ds.len(),
        dim: ds.dim(),
        apparent_error: apparent_error(&file.model, &transformed)?.value,
        fit,
        true_error,
    };
    match out {
        Some(path) => {
            emit(Some(&path), &to_json(&file))?;
            emit(Some(&sidecar(&path, ".report.json")), &to_json(&report))?;
        }
        None => emit(None, &to_json(&report))?,
    }
    Ok(())
}

fn cmd_eval(cfg: &ExperimentConfig, out: Option<PathBuf>) -> Result<()> {
    let source = cfg.source()?;
    let trainer = pipeline_trainer(cfg, cfg.trainer()?, &source)?;
    let ds = cfg.data(&source)?;
    let est = cfg.estimator()?.estimate(&trainer, &ds, cfg.seed().derive(1))?;
    emit(out.as_deref(), &to_json(&est))
}

fn curve_csv(curves: &[Curve]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["kind", "estimate", "abscissa", "mean_error", "std_error", "n_repeats"])
        .map_err(csv_err)?;
    for c in curves {
        let estimate = serde_json::to_value(c.metadata.estimate).expect("enum serializes");
        for p in &c.points {
            w.write_record([
                c.kind.as_str().to_string(),
                estimate.as_str().unwrap_or_default().to_string(),
                p.abscissa.to_string(),
                p.mean_error.to_string(),
                p.std_error.to_string(),
                p.n_repeats.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

fn cmd_curve(cfg: &ExperimentConfig, out: Option<PathBuf>) -> Result<()> {
    let spec = cfg
        .curve
        .clone()
        .ok_or_else(|| Error::Argument("config needs a \"curve\"".into()))?;
    let source = cfg.source()?;
    let trainer = pipeline_trainer(cfg, cfg.trainer()?, &source)?;
    let seed = cfg.seed();
    let curves = match (&spec, &source) {
        (CurveSpec::Learning { sizes, repeats }, Source::Problem(p)) => {
            let (t, a) = learning_curve(&trainer, p, sizes, *repeats, cfg.n_test_mc(), seed)?;
            vec![t, a]
        }
        (CurveSpec::Learning { .. }, Source::Dataset(_)) => {
            return Err(Error::Argument("a learning curve needs a \"problem\"".into()))
        }
        (CurveSpec::Feature { dims, repeats, .. }, Source::Problem(p)) => {
            let src = FeatureSource::Oracle {
                problem: p,
                n_train: cfg.require_n()?,
                n_test_mc: cfg.n_test_mc(),
            };
            vec![feature_curve(&trainer, src, dims, *repeats, seed)?]
        }
        (CurveSpec::Feature { dims, repeats, folds }, Source::Dataset(ds)) => {
            let src = FeatureSource::Data { ds, folds: *folds };
            vec![feature_curve(&trainer, src, dims, *repeats, seed)?]
        }
    };
    let csv = curve_csv(&curves)?;
    match out {
        Some(path) => {
            emit(Some(&path), &csv)?;
            let meta: Vec<_> = curves.iter().map(|c| (c.kind, &c.metadata)).collect();
            emit(Some(&sidecar(&path, ".meta.json")), &to_json(&meta))
        }
        None => emit(None, &csv),
    }
}

fn cmd_bench(cfg: &ExperimentConfig, out: Option<PathBuf>) -> Result<()> {
    let specs = cfg.trainers.clone().unwrap_or_default();
    if specs.is_empty() {
        return Err(Error::Argument("bench needs a non-empty \"trainers\" list".into()));
    }
    let source = cfg.source()?;
    let estimator = cfg.estimator()?;
    let ds = cfg.data(&source)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["trainer", "method", "n", "value", "std"]).map_err(csv_err)?;
    for spec in specs {
        let trainer = pipeline_trainer(cfg, spec, &source)?;
        // Every trainer sees the same data and the same estimator seed.
        let est = estimator.estimate(&trainer, &ds, cfg.seed().derive(1))?;
        let std = match est.std {
            Some(s) => s,
            None => error_std(est.value, ds.len())?,
        };
        let method = serde_json::to_value(est.method).expect("enum serializes");
        w.write_record([
            trainer.spec.label(),
            method.as_str().unwrap_or_default().to_string(),
            ds.len().to_string(),
            est.value.to_string(),
            std.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    emit(out.as_deref(), &bytes)
}
