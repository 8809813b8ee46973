//! Error estimators (apparent, holdout, cross-validation, bootstrap) and
//! learning / feature curves.
//!
//! All estimators are deterministic functions of the trainer, the data and
//! the seed. Folds, bootstrap rounds and curve repeats run in parallel, and
//! their results are reduced in a fixed order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{DecisionFunction, Trainer};
use crate::data::{bootstrap_sample, holdout_indices, make_folds, BootstrapSample, FoldAssignment, Label, LabeledDataset, Seed};
use crate::error::{Error, Result};
use crate::linalg::{mean, sample_std};
use crate::oracle::{true_error, GaussianMixtureProblem};

/// Retries allowed when a resampled training set is unusable.
pub const MAX_RETRIES: u64 = 10;

// Sub-seed streams: one for training randomized learners, one for Monte Carlo.
const TRAIN_STREAM: u64 = 0x7472_6169_6e;
const MC_STREAM: u64 = 0x6d63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Apparent,
    Holdout,
    Kfold,
    Loo,
    BootstrapCorrected,
    E632,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub value: f64,
    pub method: EstimateMethod,
    pub std: Option<f64>,
    #[serde(default)]
    pub components: BTreeMap<String, f64>,
}

impl ErrorEstimate {
    fn new(value: f64, method: EstimateMethod) -> ErrorEstimate {
        ErrorEstimate {
            value,
            method,
            std: None,
            components: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, v: f64) -> ErrorEstimate {
        self.components.insert(key.to_string(), v);
        self
    }
}

/// Standard deviation of an error rate measured on `n_test` independent
/// points: `sqrt(eps (1 - eps) / n_test)`.
pub fn error_std(eps: f64, n_test: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Argument(format!("error rate {eps} is not in [0, 1]")));
    }
    if n_test == 0 {
        return Err(Error::Argument("n_test must be positive".into()));
    }
    Ok((eps * (1.0 - eps) / n_test as f64).sqrt())
}

/// Number of rows of `ds` whose predicted label differs from the label.
pub fn count_errors(classifier: &dyn DecisionFunction, ds: &LabeledDataset) -> Result<usize> {
    count_errors_at(classifier, ds, &(0..ds.len()).collect::<Vec<_>>())
}

/// Like [`count_errors`], restricted to the rows in `indices`.
pub fn count_errors_at(classifier: &dyn DecisionFunction, ds: &LabeledDataset, indices: &[usize]) -> Result<usize> {
    indices
        .par_iter()
        .map(|&i| Ok(usize::from(classifier.classify(ds.row(i))? != ds.label(i))))
        .sum::<Result<usize>>()
}

pub fn apparent_error(classifier: &dyn DecisionFunction, ds: &LabeledDataset) -> Result<ErrorEstimate> {
    if ds.is_empty() {
        return Err(Error::Argument("apparent error of an empty dataset".into()));
    }
    let wrong = count_errors(classifier, ds)?;
    Ok(ErrorEstimate::new(wrong as f64 / ds.len() as f64, EstimateMethod::Apparent))
}

/// Trains on a stratified split and tests on the held-out side.
pub fn holdout_error(trainer: &dyn Trainer, ds: &LabeledDataset, test_fraction: f64, seed: Seed) -> Result<ErrorEstimate> {
    let split = holdout_indices(ds, test_fraction, true, seed)?;
    let model = trainer.train(&ds.subset(&split.train)?, seed.derive(TRAIN_STREAM))?;
    let wrong = count_errors_at(model.as_ref(), ds, &split.test)?;
    let n_test = split.test.len();
    let value = wrong as f64 / n_test as f64;
    let mut est = ErrorEstimate::new(value, EstimateMethod::Holdout)
        .with("errors", wrong as f64)
        .with("n_test", n_test as f64);
    est.std = Some(error_std(value, n_test)?);
    Ok(est)
}

/// Seed handed to the trainer for the fold whose smallest test index is
/// `first`. Keying on a row index rather than the fold number makes `k = N`
/// cross-validation and leave-one-out train identical models.
fn fold_train_seed(seed: Seed, first: usize) -> Seed {
    seed.derive(TRAIN_STREAM).derive(first as u64)
}

/// Total test-fold errors over a fixed fold assignment.
pub fn cv_error_count(trainer: &dyn Trainer, ds: &LabeledDataset, folds: &FoldAssignment, seed: Seed) -> Result<usize> {
    if folds.fold_index().len() != ds.len() {
        return Err(Error::Argument(format!(
            "fold assignment covers {} rows, dataset has {}",
            folds.fold_index().len(),
            ds.len()
        )));
    }
    (0..folds.k())
        .into_par_iter()
        .map(|f| {
            let test = folds.test_indices(f);
            let Some(&first) = test.first() else {
                return Ok(0);
            };
            let model = trainer.train(&ds.subset(&folds.train_indices(f))?, fold_train_seed(seed, first))?;
            count_errors_at(model.as_ref(), ds, &test)
        })
        .collect::<Result<Vec<usize>>>()
        .map(|v| v.into_iter().sum())
}

fn cv_estimate(wrong: usize, n: usize, method: EstimateMethod) -> Result<ErrorEstimate> {
    let value = wrong as f64 / n as f64;
    let mut est = ErrorEstimate::new(value, method).with("errors", wrong as f64);
    est.std = Some(error_std(value, n)?);
    Ok(est)
}

/// `k`-fold cross-validation; the value is total errors over `N`.
pub fn kfold_cv(trainer: &dyn Trainer, ds: &LabeledDataset, k: usize, stratified: bool, seed: Seed) -> Result<ErrorEstimate> {
    let folds = make_folds(ds, k, stratified, seed)?;
    let wrong = cv_error_count(trainer, ds, &folds, seed)?;
    cv_estimate(wrong, ds.len(), EstimateMethod::Kfold)
}

/// Leave-one-out cross-validation. Needs `N >= 3`. A complement that has
/// lost a class is still handed to the trainer; if the trainer rejects it,
/// the result is an estimation error naming the left-out row.
pub fn loo_cv(trainer: &dyn Trainer, ds: &LabeledDataset, seed: Seed) -> Result<ErrorEstimate> {
    let n = ds.len();
    if n < 3 {
        return Err(Error::Estimation(format!(
            "leave-one-out on N = {n} leaves one-point training sets"
        )));
    }
    let (n_pos, n_neg) = (ds.n_pos(), ds.n_neg());
    let wrong = (0..n)
        .into_par_iter()
        .map(|i| {
            let rest: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let single_class = match ds.label(i) {
                Label::Pos => n_pos == 1 || n_neg == 0,
                Label::Neg => n_neg == 1 || n_pos == 0,
            };
            let model = match trainer.train(&ds.subset(&rest)?, fold_train_seed(seed, i)) {
                Ok(m) => m,
                Err(e) if single_class => {
                    return Err(Error::Estimation(format!(
                        "leaving out row {i} leaves a single-class training set the trainer rejects: {e}"
                    )))
                }
                Err(e) => return Err(e),
            };
            Ok(usize::from(model.classify(ds.row(i))? != ds.label(i)))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    cv_estimate(wrong, n, EstimateMethod::Loo)
}

/// Bootstrap draw for round `round`, redrawn with derived seeds while it
/// misses a class present in `ds` or, if `need_oob`, leaves nothing out.
/// Returns the draw and the seed that produced it.
fn usable_bootstrap(ds: &LabeledDataset, round_seed: Seed, need_oob: bool) -> Result<(BootstrapSample, Seed)> {
    let both = ds.has_both_classes();
    for attempt in 0..=MAX_RETRIES {
        let s = if attempt == 0 { round_seed } else { round_seed.derive(attempt) };
        let b = bootstrap_sample(ds, s)?;
        let has_both = !both || {
            let pos = b.indices.iter().filter(|&&i| ds.label(i) == Label::Pos).count();
            pos > 0 && pos < b.indices.len()
        };
        if has_both && (!need_oob || !b.out_of_bag.is_empty()) {
            return Ok((b, s));
        }
    }
    Err(Error::Estimation(format!(
        "no usable bootstrap sample after {MAX_RETRIES} retries (N = {})",
        ds.len()
    )))
}

fn check_rounds(m_rounds: usize) -> Result<()> {
    if m_rounds == 0 {
        return Err(Error::Argument("m_rounds must be at least 1".into()));
    }
    Ok(())
}

/// Resubstitution error of the classifier trained on all of `ds`.
fn full_apparent(trainer: &dyn Trainer, ds: &LabeledDataset, seed: Seed) -> Result<f64> {
    let model = trainer.train(ds, seed.derive(TRAIN_STREAM))?;
    Ok(apparent_error(model.as_ref(), ds)?.value)
}

/// Apparent error minus the bootstrap bias estimate
/// `beta = mean_i (eps_i^A - eps_i^T)`, where round `i` trains on a
/// bootstrap sample, `eps_i^A` is its error on that sample and `eps_i^T` its
/// error on the full set. The value is clamped to `[0, 1]`; the unclamped
/// value is kept under `raw_value`.
pub fn bootstrap_corrected(trainer: &dyn Trainer, ds: &LabeledDataset, m_rounds: usize, seed: Seed) -> Result<ErrorEstimate> {
    check_rounds(m_rounds)?;
    let apparent = full_apparent(trainer, ds, seed)?;
    let diffs = (0..m_rounds as u64)
        .into_par_iter()
        .map(|r| {
            let (b, s) = usable_bootstrap(ds, seed.derive(r), false)?;
            let sample = ds.subset(&b.indices)?;
            let model = trainer.train(&sample, s.derive(TRAIN_STREAM))?;
            let e_a = count_errors(model.as_ref(), &sample)? as f64 / sample.len() as f64;
            let e_t = count_errors(model.as_ref(), ds)? as f64 / ds.len() as f64;
            Ok(e_a - e_t)
        })
        .collect::<Result<Vec<f64>>>()?;
    let bias = mean(&diffs);
    let raw = apparent - bias;
    Ok(ErrorEstimate::new(raw.clamp(0.0, 1.0), EstimateMethod::BootstrapCorrected)
        .with("apparent", apparent)
        .with("bias", bias)
        .with("raw_value", raw))
}

/// `0.368 apparent + 0.632 oob`, kept inside the interval spanned by the two
/// inputs.
pub fn e632_combine(apparent: f64, out_of_bootstrap: f64) -> f64 {
    let v = 0.368 * apparent + 0.632 * out_of_bootstrap;
    v.clamp(apparent.min(out_of_bootstrap), apparent.max(out_of_bootstrap))
}

/// The .632 bootstrap estimate. The out-of-bootstrap error pools the
/// misclassified out-of-bag rows of all rounds and divides by the total
/// out-of-bag count.
pub fn e632(trainer: &dyn Trainer, ds: &LabeledDataset, m_rounds: usize, seed: Seed) -> Result<ErrorEstimate> {
    check_rounds(m_rounds)?;
    let apparent = full_apparent(trainer, ds, seed)?;
    let rounds = (0..m_rounds as u64)
        .into_par_iter()
        .map(|r| {
            let (b, s) = usable_bootstrap(ds, seed.derive(r), true)?;
            let model = trainer.train(&ds.subset(&b.indices)?, s.derive(TRAIN_STREAM))?;
            Ok((count_errors_at(model.as_ref(), ds, &b.out_of_bag)?, b.out_of_bag.len()))
        })
        .collect::<Result<Vec<(usize, usize)>>>()?;
    let wrong: usize = rounds.iter().map(|r| r.0).sum();
    let total: usize = rounds.iter().map(|r| r.1).sum();
    let oob = wrong as f64 / total as f64;
    Ok(ErrorEstimate::new(e632_combine(apparent, oob), EstimateMethod::E632)
        .with("apparent", apparent)
        .with("out_of_bootstrap", oob)
        .with("out_of_bag_total", total as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Learning,
    Feature,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Learning => "learning",
            CurveKind::Feature => "feature",
        }
    }
}

/// Which error a curve reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveEstimate {
    /// Monte-Carlo error on the generating distribution.
    True,
    /// Error on the training set.
    Apparent,
    /// Cross-validated error on given data.
    Cv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub abscissa: usize,
    pub mean_error: f64,
    /// Standard error of the mean over repeats; 0 for a single repeat.
    pub std_error: f64,
    pub n_repeats: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub trainer: String,
    pub source: String,
    pub seed: Seed,
    pub estimate: CurveEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
    pub metadata: CurveMetadata,
}

impl Curve {
    pub fn point(&self, abscissa: usize) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.abscissa == abscissa)
    }
}

fn aggregate(abscissa: usize, values: &[f64]) -> CurvePoint {
    let n = values.len();
    let std_error = if n > 1 { sample_std(values) / (n as f64).sqrt() } else { 0.0 };
    CurvePoint {
        abscissa,
        mean_error: mean(values),
        std_error,
        n_repeats: n,
    }
}

fn check_abscissas(xs: &[usize], what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Argument(format!("{what} list is empty")));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// Draws `n` points from `problem`, redrawing with derived seeds while the
/// sample has a single class.
fn sample_two_class(problem: &GaussianMixtureProblem, n: usize, seed: Seed) -> Result<LabeledDataset> {
    for attempt in 0..=MAX_RETRIES {
        let s = if attempt == 0 { seed } else { seed.derive(attempt) };
        let ds = problem.sample(n, s)?;
        if ds.has_both_classes() {
            return Ok(ds);
        }
    }
    Err(Error::Estimation(format!(
        "sample of size {n} stayed single-class after {MAX_RETRIES} retries"
    )))
}

/// Grid of (point, repeat) evaluations in parallel, returned as one row of
/// repeat values per point.
fn grid<F>(n_points: usize, repeats: usize, f: F) -> Result<Vec<Vec<(f64, f64)>>>
where
    F: Fn(usize, u64) -> Result<(f64, f64)> + Sync,
{
    let flat = (0..n_points * repeats)
        .into_par_iter()
        .map(|j| f(j / repeats, (j % repeats) as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(flat.chunks(repeats).map(|c| c.to_vec()).collect())
}

/// True-error and apparent-error learning curves on an oracle problem.
///
/// Repeat `r` uses the same seed at every size, so the training sets are
/// nested across sizes and the Monte-Carlo test stream is shared.
pub fn learning_curve(
    trainer: &dyn Trainer,
    problem: &GaussianMixtureProblem,
    sizes: &[usize],
    repeats: usize,
    n_test_mc: usize,
    seed: Seed,
) -> Result<(Curve, Curve)> {
    check_abscissas(sizes, "sizes")?;
    if repeats == 0 {
        return Err(Error::Argument("repeats must be at least 1".into()));
    }
    let rows = grid(sizes.len(), repeats, |i, r| {
        let rs = seed.derive(r);
        let train = sample_two_class(problem, sizes[i], rs)?;
        let model = trainer.train(&train, rs.derive(TRAIN_STREAM))?;
        let app = apparent_error(model.as_ref(), &train)?.value;
        let tru = true_error(model.as_ref(), problem, n_test_mc, rs.derive(MC_STREAM))?;
        Ok((tru, app))
    })?;
    let curve = |estimate: CurveEstimate, pick: fn(&(f64, f64)) -> f64| Curve {
        kind: CurveKind::Learning,
        points: sizes
            .iter()
            .zip(&rows)
            .map(|(&n, row)| aggregate(n, &row.iter().map(pick).collect::<Vec<_>>()))
            .collect(),
        metadata: CurveMetadata {
            trainer: trainer.name(),
            source: "oracle".into(),
            seed,
            estimate,
        },
    };
    Ok((curve(CurveEstimate::True, |v| v.0), curve(CurveEstimate::Apparent, |v| v.1)))
}

/// Where a feature curve gets its feature sets and errors from.
pub enum FeatureSource<'a> {
    /// The problem's own features followed by label-independent noise
    /// features; error by Monte Carlo.
    Oracle {
        problem: &'a GaussianMixtureProblem,
        n_train: usize,
        n_test_mc: usize,
    },
    /// The leading `d` columns of a dataset; error by stratified `folds`-fold
    /// cross-validation.
    Data { ds: &'a LabeledDataset, folds: usize },
}

/// Error against the number of features `d` for each `d` in `dims`.
pub fn feature_curve(trainer: &dyn Trainer, source: FeatureSource<'_>, dims: &[usize], repeats: usize, seed: Seed) -> Result<Curve> {
    check_abscissas(dims, "dims")?;
    if repeats == 0 {
        return Err(Error::Argument("repeats must be at least 1".into()));
    }
    let (rows, label, estimate) = match source {
        FeatureSource::Oracle {
            problem,
            n_train,
            n_test_mc,
        } => {
            let base = problem.dim();
            if dims[0] < base {
                return Err(Error::Argument(format!(
                    "dimension {} is below the problem's {base} features",
                    dims[0]
                )));
            }
            let problems: Vec<GaussianMixtureProblem> = dims.iter().map(|&d| problem.with_noise_dims(d - base)).collect();
            let rows = grid(dims.len(), repeats, |i, r| {
                let rs = seed.derive(r);
                let train = sample_two_class(&problems[i], n_train, rs)?;
                let model = trainer.train(&train, rs.derive(TRAIN_STREAM))?;
                Ok((true_error(model.as_ref(), &problems[i], n_test_mc, rs.derive(MC_STREAM))?, 0.0))
            })?;
            (rows, "oracle".to_string(), CurveEstimate::True)
        }
        FeatureSource::Data { ds, folds } => {
            if let Some(&d) = dims.iter().find(|&&d| d == 0 || d > ds.dim()) {
                return Err(Error::Argument(format!(
                    "dimension {d} is not in 1..={}",
                    ds.dim()
                )));
            }
            let subsets = dims
                .iter()
                .map(|&d| ds.select_features(&(0..d).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            let rows = grid(dims.len(), repeats, |i, r| {
                let est = kfold_cv(trainer, &subsets[i], folds, true, seed.derive(r))?;
                Ok((est.value, 0.0))
            })?;
            (rows, "data".to_string(), CurveEstimate::Cv)
        }
    };
    Ok(Curve {
        kind: CurveKind::Feature,
        points: dims
            .iter()
            .zip(&rows)
            .map(|(&d, row)| aggregate(d, &row.iter().map(|v| v.0).collect::<Vec<_>>()))
            .collect(),
        metadata: CurveMetadata {
            trainer: trainer.name(),
            source: label,
            seed,
            estimate,
        },
    })
}
