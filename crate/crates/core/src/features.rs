//! Feature transforms and greedy forward feature selection.
//!
//! A transform pipeline is written as a string such as
//! `"poly2+standardize+noise:5+select:0,1"`: steps separated by `+`, applied
//! left to right. Fitting a pipeline on training data fixes every parameter
//! (standardization statistics, noise seeds), and the fitted
//! [`Pipeline`] is then applied unchanged to test data.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::Trainer;
use crate::data::{make_folds, LabeledDataset, Seed};
use crate::error::{check_dim, Error, Result};
use crate::evaluation::cv_error_count;
use crate::linear::Standardization;

/// A fully parameterized map from `R^d` to `R^d'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureTransform {
    /// Appends `x_i x_j` for `i <= j` (row by row), with cross terms scaled by
    /// `sqrt 2`, so the appended block of `x` dotted with that of `z` is
    /// `(x . z)^2`.
    Poly2Expand,
    /// `(x - mean) / scale` per column.
    Standardize { mean: Vec<f64>, scale: Vec<f64> },
    /// Appends `count` standard normal columns drawn from `seed`.
    AppendNoise { count: usize, seed: Seed },
    /// Keeps the listed columns in the listed order.
    Select { indices: Vec<usize> },
}

impl FeatureTransform {
    /// Standardization with statistics taken from `ds`.
    pub fn fit_standardize(ds: &LabeledDataset) -> FeatureTransform {
        let Standardization { mean, scale } = Standardization::fit(ds);
        FeatureTransform::Standardize { mean, scale }
    }

    pub fn output_dim(&self, d: usize) -> Result<usize> {
        match self {
            FeatureTransform::Poly2Expand => Ok(d + d * (d + 1) / 2),
            FeatureTransform::Standardize { mean, .. } => {
                check_dim(mean.len(), d)?;
                Ok(d)
            }
            FeatureTransform::AppendNoise { count, .. } => Ok(d + count),
            FeatureTransform::Select { indices } => {
                if let Some(&j) = indices.iter().find(|&&j| j >= d) {
                    return Err(Error::Argument(format!("selected column {j} is out of range for d = {d}")));
                }
                if indices.is_empty() {
                    return Err(Error::Argument("select needs at least one column".into()));
                }
                Ok(indices.len())
            }
        }
    }
}

fn poly2_append(x: &[f64], out: &mut Vec<f64>) {
    out.extend_from_slice(x);
    for i in 0..x.len() {
        out.push(x[i] * x[i]);
        for j in i + 1..x.len() {
            out.push(std::f64::consts::SQRT_2 * x[i] * x[j]);
        }
    }
}

pub fn apply_transform(t: &FeatureTransform, ds: &LabeledDataset) -> Result<LabeledDataset> {
    let out_dim = t.output_dim(ds.dim())?;
    match t {
        FeatureTransform::Poly2Expand => ds.map_rows(out_dim, poly2_append),
        FeatureTransform::Standardize { mean, scale } => {
            if let Some(s) = scale.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
                return Err(Error::Argument(format!("standardization scale {s} is not positive")));
            }
            ds.map_rows(out_dim, |r, out| {
                out.extend(r.iter().zip(mean).zip(scale).map(|((v, m), s)| (v - m) / s));
            })
        }
        FeatureTransform::AppendNoise { count, seed } => append_noise(ds, *count, *seed),
        FeatureTransform::Select { indices } => ds.select_features(indices),
    }
}

/// Appends `count` standard normal columns, independent of the labels. The
/// values depend only on `(N, count, seed)`.
pub fn append_noise(ds: &LabeledDataset, count: usize, seed: Seed) -> Result<LabeledDataset> {
    if count == 0 {
        return Err(Error::Argument("noise column count must be at least 1".into()));
    }
    let mut rng = seed.rng();
    let extra: Vec<f64> = (0..ds.len() * count).map(|_| StandardNormal.sample(&mut rng)).collect();
    ds.append_columns(&extra, count)
}

/// One unfitted step of a transform string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformStep {
    Poly2,
    Standardize,
    Noise(usize),
    Select(Vec<usize>),
}

impl fmt::Display for TransformStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformStep::Poly2 => f.write_str("poly2"),
            TransformStep::Standardize => f.write_str("standardize"),
            TransformStep::Noise(c) => write!(f, "noise:{c}"),
            TransformStep::Select(ix) => {
                let parts: Vec<String> = ix.iter().map(|i| i.to_string()).collect();
                write!(f, "select:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for TransformStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<TransformStep> {
        let s = s.trim();
        let bad = |why: &str| Error::Argument(format!("transform step {s:?}: {why}"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        match (name, arg) {
            ("poly2", None) => Ok(TransformStep::Poly2),
            ("standardize", None) => Ok(TransformStep::Standardize),
            ("noise", Some(a)) => match a.parse::<usize>() {
                Ok(c) if c > 0 => Ok(TransformStep::Noise(c)),
                _ => Err(bad("expected a positive column count")),
            },
            ("select", Some(a)) => a
                .split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|_| bad("expected comma-separated column indices")))
                .collect::<Result<Vec<_>>>()
                .map(TransformStep::Select),
            ("poly2" | "standardize", Some(_)) => Err(bad("takes no argument")),
            ("noise" | "select", None) => Err(bad("missing argument")),
            _ => Err(bad("unknown transform; expected poly2, standardize, noise:<count> or select:<i,j,...>")),
        }
    }
}

/// Parses `"step+step+..."`; an empty string is the empty pipeline.
pub fn parse_transform_spec(spec: &str) -> Result<Vec<TransformStep>> {
    if spec.trim().is_empty() {
        return Ok(Vec::new());
    }
    spec.split('+').map(str::parse).collect()
}

/// Fitted transforms applied in order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pipeline {
    pub steps: Vec<FeatureTransform>,
}

impl Pipeline {
    /// Fits the steps on `train` left to right: each step sees the output of
    /// the previous ones. Noise step `i` draws from `seed.derive(i)`.
    /// Returns the pipeline and the transformed training set.
    pub fn fit(steps: &[TransformStep], train: &LabeledDataset, seed: Seed) -> Result<(Pipeline, LabeledDataset)> {
        let mut fitted = Vec::with_capacity(steps.len());
        let mut cur = train.clone();
        for (i, step) in steps.iter().enumerate() {
            let t = match step {
                TransformStep::Poly2 => FeatureTransform::Poly2Expand,
                TransformStep::Standardize => FeatureTransform::fit_standardize(&cur),
                TransformStep::Noise(count) => FeatureTransform::AppendNoise {
                    count: *count,
                    seed: seed.derive(i as u64),
                },
                TransformStep::Select(ix) => FeatureTransform::Select { indices: ix.clone() },
            };
            cur = apply_transform(&t, &cur)?;
            fitted.push(t);
        }
        Ok((Pipeline { steps: fitted }, cur))
    }

    pub fn apply(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        let mut cur = ds.clone();
        for t in &self.steps {
            cur = apply_transform(t, &cur)?;
        }
        Ok(cur)
    }

    pub fn output_dim(&self, d: usize) -> Result<usize> {
        self.steps.iter().try_fold(d, |d, t| t.output_dim(d))
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// One greedy step of [`forward_select`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    /// Feature added at this step.
    pub feature: usize,
    /// Cross-validated error of the subset after adding it.
    pub cv_error: f64,
    /// Every candidate considered at this step with its CV error, by
    /// increasing feature index.
    pub candidates: Vec<(usize, f64)>,
}

/// Greedy wrapper selection: repeatedly adds the feature whose inclusion
/// gives the lowest `folds`-fold CV error of `trainer`, until `max_features`
/// are chosen. Ties go to the lower feature index. All steps share one
/// stratified fold assignment drawn from `seed`.
pub fn forward_select(
    ds: &LabeledDataset,
    trainer: &dyn Trainer,
    max_features: usize,
    folds: usize,
    seed: Seed,
) -> Result<Vec<SelectionStep>> {
    let d = ds.dim();
    if max_features == 0 || max_features > d {
        return Err(Error::Argument(format!("max_features {max_features} is not in 1..={d}")));
    }
    if folds < 2 {
        return Err(Error::Argument(format!("folds = {folds}; need at least 2")));
    }
    let assignment = make_folds(ds, folds, true, seed)?;
    let n = ds.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(max_features);
    let mut trajectory = Vec::with_capacity(max_features);
    while chosen.len() < max_features {
        let candidates: Vec<usize> = (0..d).filter(|j| !chosen.contains(j)).collect();
        let counts = candidates
            .par_iter()
            .map(|&c| {
                let mut cols = chosen.clone();
                cols.push(c);
                cv_error_count(trainer, &ds.select_features(&cols)?, &assignment, seed)
            })
            .collect::<Result<Vec<usize>>>()?;
        let mut best = 0;
        for (k, &e) in counts.iter().enumerate() {
            if e < counts[best] {
                best = k;
            }
        }
        chosen.push(candidates[best]);
        trajectory.push(SelectionStep {
            feature: candidates[best],
            cv_error: counts[best] as f64 / n as f64,
            candidates: candidates
                .iter()
                .zip(&counts)
                .map(|(&c, &e)| (c, e as f64 / n as f64))
                .collect(),
        });
    }
    Ok(trajectory)
}
