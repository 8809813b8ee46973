//! Experiment configuration files.
//!
//! Relative paths inside a config file are resolved against the directory
//! that contains it.

use std::path::{Path, PathBuf};

use classikit::data::load_csv;
use classikit::evaluation::{bootstrap_corrected, e632, holdout_error, kfold_cv, loo_cv, ErrorEstimate};
use classikit::features::{parse_transform_spec, TransformStep};
use classikit::oracle::GaussianMixtureProblem;
use classikit::registry::TrainerSpec;
use classikit::{Error, LabeledDataset, Result, Seed, Trainer};
use serde::Deserialize;

pub const DEFAULT_N_TEST_MC: usize = 100_000;

/// A problem given inline or as the path of a problem JSON file.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Path(PathBuf),
    Inline(GaussianMixtureProblem),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    Apparent,
    Holdout {
        #[serde(default = "default_test_fraction")]
        test_fraction: f64,
    },
    Kfold {
        k: usize,
        #[serde(default = "default_true")]
        stratified: bool,
    },
    Loo,
    BootstrapCorrected {
        #[serde(default = "default_rounds")]
        rounds: usize,
    },
    E632 {
        #[serde(default = "default_rounds")]
        rounds: usize,
    },
}

fn default_test_fraction() -> f64 {
    0.3
}

fn default_true() -> bool {
    true
}

fn default_rounds() -> usize {
    100
}

impl EstimatorSpec {
    pub fn estimate(&self, trainer: &dyn Trainer, ds: &LabeledDataset, seed: Seed) -> Result<ErrorEstimate> {
        match *self {
            EstimatorSpec::Apparent => {
                let model = trainer.train(ds, seed)?;
                classikit::evaluation::apparent_error(model.as_ref(), ds)
            }
            EstimatorSpec::Holdout { test_fraction } => holdout_error(trainer, ds, test_fraction, seed),
            EstimatorSpec::Kfold { k, stratified } => kfold_cv(trainer, ds, k, stratified, seed),
            EstimatorSpec::Loo => loo_cv(trainer, ds, seed),
            EstimatorSpec::BootstrapCorrected { rounds } => bootstrap_corrected(trainer, ds, rounds, seed),
            EstimatorSpec::E632 { rounds } => e632(trainer, ds, rounds, seed),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// Needs a problem; the training sizes are `sizes`.
    Learning { sizes: Vec<usize>, repeats: usize },
    /// With a problem: noise features are appended up to each `d` and the
    /// training size is the config's `n`. With a dataset: the leading `d`
    /// columns, scored by `folds`-fold cross-validation.
    Feature {
        dims: Vec<usize>,
        repeats: usize,
        #[serde(default = "default_folds")]
        folds: usize,
    },
}

fn default_folds() -> usize {
    5
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Option<ProblemRef>,
    pub dataset: Option<PathBuf>,
    /// Number of points drawn from the problem for training or estimation.
    pub n: Option<usize>,
    pub trainer: Option<TrainerSpec>,
    pub trainers: Option<Vec<TrainerSpec>>,
    /// Transform string such as `"poly2+standardize"`.
    #[serde(default)]
    pub transform: String,
    pub estimator: Option<EstimatorSpec>,
    pub curve: Option<CurveSpec>,
    /// Monte-Carlo test size for true errors on a problem.
    pub n_test_mc: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// The data an experiment runs on.
pub enum Source {
    Problem(GaussianMixtureProblem),
    Dataset(LabeledDataset),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Argument(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("config {}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn seed(&self) -> Seed {
        Seed(self.seed)
    }

    pub fn problem(&self) -> Result<Option<GaussianMixtureProblem>> {
        match &self.problem {
            None => Ok(None),
            Some(ProblemRef::Inline(p)) => Ok(Some(p.clone())),
            Some(ProblemRef::Path(p)) => load_problem(&self.resolve(p)).map(Some),
        }
    }

    pub fn source(&self) -> Result<Source> {
        match (&self.problem, &self.dataset) {
            (Some(_), None) => Ok(Source::Problem(self.problem()?.expect("problem is set"))),
            (None, Some(d)) => Ok(Source::Dataset(load_csv(self.resolve(d))?)),
            _ => Err(Error::Argument("config needs exactly one of \"problem\" and \"dataset\"".into())),
        }
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::Argument("config needs \"n\" to sample from a problem".into()))
    }

    /// The training data: the dataset, or `n` points sampled from the
    /// problem with the config seed.
    pub fn data(&self, source: &Source) -> Result<LabeledDataset> {
        match source {
            Source::Dataset(ds) => Ok(ds.clone()),
            Source::Problem(p) => p.sample(self.require_n()?, self.seed()),
        }
    }

    pub fn transform_steps(&self) -> Result<Vec<TransformStep>> {
        parse_transform_spec(&self.transform)
    }

    pub fn trainer(&self) -> Result<TrainerSpec> {
        self.trainer
            .clone()
            .ok_or_else(|| Error::Argument("config needs a \"trainer\"".into()))
    }

    pub fn estimator(&self) -> Result<EstimatorSpec> {
        self.estimator
            .clone()
            .ok_or_else(|| Error::Argument("config needs an \"estimator\"".into()))
    }

    pub fn n_test_mc(&self) -> usize {
        self.n_test_mc.unwrap_or(DEFAULT_N_TEST_MC)
    }
}

pub fn load_problem(path: &Path) -> Result<GaussianMixtureProblem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Argument(format!("cannot read problem file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("problem file {}: {e}", path.display())))
}
