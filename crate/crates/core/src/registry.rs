//! Learners by name, with their parameters, and a single serializable model
//! type covering every learner.
//!
//! A [`TrainerSpec`] is written as JSON with a `"name"` field selecting the
//! learner, for example `{"name": "knn", "k": 25}` or
//! `{"name": "linear", "config": {"loss": "hinge", "lambda": 0.1}}`.

use serde::{Deserialize, Serialize};

use crate::classifier::{DecisionFunction, Trainer};
use crate::data::{LabeledDataset, Seed};
use crate::ensemble::{adaboost, bagging, random_subspace, BoostModel, Ensemble};
use crate::error::{Error, Result};
use crate::features::Pipeline;
use crate::generative::{fit_lda, fit_parzen, LdaModel, LdaOptions, ParzenModel};
use crate::kernel::{train_kernel_machine, Kernel, KernelMachine};
use crate::linear::{train_least_squares, train_linear, LinearHypothesis, Termination, TrainConfig};
use crate::neighbors::{fit_knn, KnnClassifier};
use crate::neural::{train_net, NetTrainConfig, OneHiddenLayerNet};
use crate::oracle::{BayesClassifier, GaussianMixtureProblem};
use crate::tree::{fit_tree, DecisionTree, TreeConfig};

fn default_rounds() -> usize {
    25
}

/// Names accepted in the `"name"` field.
pub const TRAINER_NAMES: &[&str] = &[
    "lda",
    "parzen",
    "logistic",
    "linear",
    "least_squares",
    "kernel",
    "knn",
    "tree",
    "bagging",
    "subspace",
    "adaboost",
    "net",
    "bayes",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrainerSpec {
    Lda {
        #[serde(default)]
        laplace_priors: bool,
        #[serde(default)]
        unbiased_cov: bool,
        #[serde(default)]
        ridge_cov: f64,
    },
    Parzen {
        bandwidth: f64,
    },
    /// Logistic loss with the default optimizer settings.
    Logistic {
        #[serde(default)]
        lambda: f64,
    },
    /// Any convex loss; see [`TrainConfig`]. The seed comes from training.
    Linear {
        #[serde(default)]
        config: TrainConfig,
    },
    LeastSquares {
        #[serde(default)]
        lambda: f64,
    },
    Kernel {
        kernel: Kernel,
        lambda: f64,
    },
    Knn {
        k: usize,
    },
    Tree {
        #[serde(default)]
        config: TreeConfig,
    },
    Bagging {
        #[serde(default = "default_rounds")]
        rounds: usize,
        #[serde(default)]
        tree: TreeConfig,
    },
    Subspace {
        #[serde(default = "default_rounds")]
        rounds: usize,
        subspace_dim: usize,
        #[serde(default)]
        tree: TreeConfig,
    },
    Adaboost {
        #[serde(default = "default_rounds")]
        rounds: usize,
    },
    /// See [`NetTrainConfig`]; its `seed` is replaced by the training seed.
    Net {
        #[serde(default)]
        config: NetTrainConfig,
    },
    /// The Bayes rule of the generating problem; ignores the training data.
    /// The problem is attached with [`TrainerSpec::with_problem`].
    Bayes {
        #[serde(skip)]
        problem: Option<GaussianMixtureProblem>,
    },
}

/// Training diagnostics that some learners report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
}

impl TrainerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TrainerSpec::Lda { .. } => "lda",
            TrainerSpec::Parzen { .. } => "parzen",
            TrainerSpec::Logistic { .. } => "logistic",
            TrainerSpec::Linear { .. } => "linear",
            TrainerSpec::LeastSquares { .. } => "least_squares",
            TrainerSpec::Kernel { .. } => "kernel",
            TrainerSpec::Knn { .. } => "knn",
            TrainerSpec::Tree { .. } => "tree",
            TrainerSpec::Bagging { .. } => "bagging",
            TrainerSpec::Subspace { .. } => "subspace",
            TrainerSpec::Adaboost { .. } => "adaboost",
            TrainerSpec::Net { .. } => "net",
            TrainerSpec::Bayes { .. } => "bayes",
        }
    }

    /// Name followed by the parameters as `key=value`, sorted by key, e.g.
    /// `knn k=25`. Nested objects are written as compact JSON.
    pub fn label(&self) -> String {
        let mut out = self.name().to_string();
        if let Ok(serde_json::Value::Object(map)) = serde_json::to_value(self) {
            let mut keys: Vec<&String> = map.keys().filter(|k| k.as_str() != "name").collect();
            keys.sort();
            for k in keys {
                out.push_str(&format!(" {k}={}", map[k]));
            }
        }
        out
    }

    /// Attaches the generating problem to a `bayes` spec; other specs are
    /// returned unchanged.
    pub fn with_problem(self, p: &GaussianMixtureProblem) -> TrainerSpec {
        match self {
            TrainerSpec::Bayes { .. } => TrainerSpec::Bayes {
                problem: Some(p.clone()),
            },
            other => other,
        }
    }

    pub fn fit(&self, ds: &LabeledDataset, seed: Seed) -> Result<(Model, FitInfo)> {
        let mut info = FitInfo::default();
        let model = match self {
            TrainerSpec::Lda {
                laplace_priors,
                unbiased_cov,
                ridge_cov,
            } => Model::Lda(fit_lda(
                ds,
                LdaOptions {
                    laplace_priors: *laplace_priors,
                    unbiased_cov: *unbiased_cov,
                    ridge_cov: *ridge_cov,
                },
            )?),
            TrainerSpec::Parzen { bandwidth } => Model::Parzen(fit_parzen(ds, *bandwidth)?),
            TrainerSpec::Logistic { lambda } => {
                let config = TrainConfig {
                    lambda: *lambda,
                    seed,
                    ..TrainConfig::default()
                };
                Model::Linear(linear_fit(ds, &config, &mut info)?)
            }
            TrainerSpec::Linear { config } => {
                let config = TrainConfig { seed, ..config.clone() };
                Model::Linear(linear_fit(ds, &config, &mut info)?)
            }
            TrainerSpec::LeastSquares { lambda } => Model::Linear(train_least_squares(ds, *lambda)?),
            TrainerSpec::Kernel { kernel, lambda } => Model::Kernel(train_kernel_machine(ds, *kernel, *lambda)?),
            TrainerSpec::Knn { k } => Model::Knn(fit_knn(ds, *k)?),
            TrainerSpec::Tree { config } => Model::Tree(fit_tree(ds, *config)?),
            TrainerSpec::Bagging { rounds, tree } => {
                info.rounds = Some(*rounds);
                Model::Ensemble(bagging(ds, *tree, *rounds, seed)?)
            }
            TrainerSpec::Subspace {
                rounds,
                subspace_dim,
                tree,
            } => {
                info.rounds = Some(*rounds);
                Model::Ensemble(random_subspace(ds, *tree, *rounds, *subspace_dim, seed)?)
            }
            TrainerSpec::Adaboost { rounds } => {
                let m = adaboost(ds, *rounds)?;
                info.rounds = Some(m.rounds.len());
                Model::Boost(m)
            }
            TrainerSpec::Net { config } => {
                let config = NetTrainConfig { seed, ..config.clone() };
                let (net, report) = train_net(ds, &config)?;
                info.iterations = Some(report.iterations);
                info.objective = Some(report.best_objective);
                Model::Net(net)
            }
            TrainerSpec::Bayes { problem } => {
                let problem = problem.as_ref().ok_or_else(|| {
                    Error::Argument("the bayes trainer needs an oracle problem, not a dataset".into())
                })?;
                if problem.dim() != ds.dim() {
                    return Err(Error::Argument(format!(
                        "problem dimension {} differs from data dimension {}",
                        problem.dim(),
                        ds.dim()
                    )));
                }
                Model::Bayes(problem.bayes_classifier())
            }
        };
        Ok((model, info))
    }
}

fn linear_fit(ds: &LabeledDataset, config: &TrainConfig, info: &mut FitInfo) -> Result<LinearHypothesis> {
    let (h, report) = train_linear(ds, config)?;
    info.iterations = Some(report.iterations);
    info.objective = Some(report.objective);
    info.termination = Some(report.termination);
    Ok(h)
}

impl Trainer for TrainerSpec {
    fn name(&self) -> String {
        self.label()
    }

    fn train(&self, ds: &LabeledDataset, seed: Seed) -> Result<Box<dyn DecisionFunction>> {
        Ok(Box::new(self.fit(ds, seed)?.0))
    }
}

/// A trained model of any learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Lda(LdaModel),
    Parzen(ParzenModel),
    Linear(LinearHypothesis),
    Kernel(KernelMachine),
    Knn(KnnClassifier),
    Tree(DecisionTree),
    Ensemble(Ensemble),
    Boost(BoostModel),
    Net(OneHiddenLayerNet),
    Bayes(BayesClassifier),
}

impl Model {
    fn inner(&self) -> &dyn DecisionFunction {
        match self {
            Model::Lda(m) => m,
            Model::Parzen(m) => m,
            Model::Linear(m) => m,
            Model::Kernel(m) => m,
            Model::Knn(m) => m,
            Model::Tree(m) => m,
            Model::Ensemble(m) => m,
            Model::Boost(m) => m,
            Model::Net(m) => m,
            Model::Bayes(m) => m,
        }
    }
}

impl DecisionFunction for Model {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        self.inner().score(x)
    }
    fn classify(&self, x: &[f64]) -> Result<crate::data::Label> {
        self.inner().classify(x)
    }
}

/// What a model file stores: the fitted feature pipeline, the trainer that
/// produced the model, and the model, which expects transformed inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default)]
    pub transform: Pipeline,
    pub trainer: TrainerSpec,
    pub model: Model,
}

/// Fits a transform pipeline on the training data, then the learner, as one
/// [`Trainer`]. The pipeline's noise columns draw from the training seed.
pub struct PipelineTrainer {
    pub steps: Vec<crate::features::TransformStep>,
    pub spec: TrainerSpec,
}

struct Transformed {
    pipeline: Pipeline,
    model: Model,
    input_dim: usize,
}

impl DecisionFunction for Transformed {
    fn dim(&self) -> usize {
        self.input_dim
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        crate::error::check_dim(self.input_dim, x.len())?;
        let row = LabeledDataset::new(vec![x.to_vec()], vec![crate::data::Label::Pos])?;
        let t = self.pipeline.apply(&row)?;
        self.model.score(t.row(0))
    }
}

impl PipelineTrainer {
    pub fn fit(&self, ds: &LabeledDataset, seed: Seed) -> Result<(ModelFile, FitInfo, LabeledDataset)> {
        let (pipeline, transformed) = Pipeline::fit(&self.steps, ds, seed)?;
        let (model, info) = self.spec.fit(&transformed, seed)?;
        let file = ModelFile {
            transform: pipeline,
            trainer: self.spec.clone(),
            model,
        };
        Ok((file, info, transformed))
    }
}

impl Trainer for PipelineTrainer {
    fn name(&self) -> String {
        self.spec.label()
    }

    fn train(&self, ds: &LabeledDataset, seed: Seed) -> Result<Box<dyn DecisionFunction>> {
        if self.steps.is_empty() {
            return self.spec.train(ds, seed);
        }
        let (file, _, _) = self.fit(ds, seed)?;
        Ok(Box::new(Transformed {
            pipeline: file.transform,
            model: file.model,
            input_dim: ds.dim(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::apparent_error;
    use crate::features::parse_transform_spec;
    use crate::oracle::xor_layout;

    fn parse(json: &str) -> Result<TrainerSpec> {
        serde_json::from_str(json).map_err(|e| Error::Format(e.to_string()))
    }

    #[test]
    fn parses_every_registered_name() {
        let examples = [
            r#"{"name":"lda","ridge_cov":0.001}"#,
            r#"{"name":"parzen","bandwidth":0.5}"#,
            r#"{"name":"logistic","lambda":0.1}"#,
            r#"{"name":"linear","config":{"loss":"hinge","lambda":0.1}}"#,
            r#"{"name":"least_squares"}"#,
            r#"{"name":"kernel","kernel":{"kind":"rbf","sigma":1.0},"lambda":0.1}"#,
            r#"{"name":"knn","k":3}"#,
            r#"{"name":"tree","config":{"max_depth":3}}"#,
            r#"{"name":"bagging","rounds":5}"#,
            r#"{"name":"subspace","rounds":5,"subspace_dim":1}"#,
            r#"{"name":"adaboost","rounds":5}"#,
            r#"{"name":"net","config":{"hidden_units":2,"max_iters":50}}"#,
            r#"{"name":"bayes"}"#,
        ];
        let names: Vec<&str> = examples.iter().map(|e| parse(e).unwrap().name()).collect();
        assert_eq!(names, TRAINER_NAMES);
        assert!(parse(r#"{"name":"svm"}"#).is_err());
        assert!(parse(r#"{"name":"knn","k":3,"kk":1}"#).is_err());
        assert!(parse(r#"{"name":"knn"}"#).is_err());
    }

    #[test]
    fn every_trainer_fits_and_round_trips() {
        let ds = xor_layout([6, 6, 6, 6], 0.2, Seed(1)).unwrap();
        let problem = GaussianMixtureProblem::isotropic(0.5, vec![1.0, 1.0], vec![0.0, 0.0], 0.3).unwrap();
        let specs = [
            r#"{"name":"lda"}"#,
            r#"{"name":"parzen","bandwidth":0.3}"#,
            r#"{"name":"logistic","lambda":0.1}"#,
            r#"{"name":"linear","config":{"loss":"hinge","lambda":0.1}}"#,
            r#"{"name":"least_squares"}"#,
            r#"{"name":"kernel","kernel":{"kind":"rbf","sigma":0.5},"lambda":0.01}"#,
            r#"{"name":"knn","k":3}"#,
            r#"{"name":"tree"}"#,
            r#"{"name":"bagging","rounds":5}"#,
            r#"{"name":"subspace","rounds":5,"subspace_dim":1}"#,
            r#"{"name":"adaboost","rounds":5}"#,
            r#"{"name":"net","config":{"hidden_units":3,"max_iters":200}}"#,
            r#"{"name":"bayes"}"#,
        ];
        for s in specs {
            let spec = parse(s).unwrap().with_problem(&problem);
            let (model, _) = spec.fit(&ds, Seed(2)).unwrap();
            let file = ModelFile {
                transform: Pipeline::default(),
                trainer: spec.clone(),
                model,
            };
            let json = serde_json::to_string(&file).unwrap();
            let back: ModelFile = serde_json::from_str(&json).unwrap();
            for x in ds.rows() {
                assert_eq!(back.model.score(x).unwrap(), file.model.score(x).unwrap(), "{s}");
            }
            // Determinism of fitting under a fixed seed.
            assert_eq!(spec.fit(&ds, Seed(2)).unwrap().0, file.model, "{s}");
        }
    }

    #[test]
    fn bayes_without_problem_is_a_usage_error() {
        let ds = xor_layout([2, 2, 2, 2], 0.1, Seed(1)).unwrap();
        let spec = parse(r#"{"name":"bayes"}"#).unwrap();
        assert!(spec.fit(&ds, Seed(0)).unwrap_err().is_usage());
    }

    #[test]
    fn labels_are_stable() {
        assert_eq!(parse(r#"{"name":"knn","k":25}"#).unwrap().label(), "knn k=25");
        assert_eq!(
            parse(r#"{"name":"adaboost"}"#).unwrap().label(),
            "adaboost rounds=25"
        );
    }

    #[test]
    fn linear_reports_diagnostics() {
        let ds = xor_layout([5, 5, 5, 5], 0.2, Seed(3)).unwrap();
        let (_, info) = parse(r#"{"name":"logistic","lambda":1.0}"#).unwrap().fit(&ds, Seed(0)).unwrap();
        assert!(info.iterations.is_some() && info.objective.is_some());
        assert_eq!(info.termination, Some(Termination::Converged));
    }

    #[test]
    fn pipeline_trainer_solves_xor_with_poly2() {
        let ds = xor_layout([10, 10, 10, 10], 0.1, Seed(4)).unwrap();
        let ds = ds.map_rows(2, |r, o| o.extend([r[0] - 0.5, r[1] - 0.5])).unwrap();
        let plain = parse(r#"{"name":"lda"}"#).unwrap();
        let t = PipelineTrainer {
            steps: parse_transform_spec("poly2").unwrap(),
            spec: plain.clone(),
        };
        let m = t.train(&ds, Seed(0)).unwrap();
        assert_eq!(apparent_error(m.as_ref(), &ds).unwrap().value, 0.0);
        let linear = plain.train(&ds, Seed(0)).unwrap();
        assert!(apparent_error(linear.as_ref(), &ds).unwrap().value >= 0.25);
    }
}
