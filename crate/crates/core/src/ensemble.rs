//! Multiple classifier systems: bagged and random-subspace trees combined by
//! fixed rules, and discrete AdaBoost over weighted Gini stumps.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::DecisionFunction;
use crate::data::{bootstrap_sample, Label, LabeledDataset, Seed};
use crate::error::{check_dim, Error, Result};
use crate::tree::{fit_tree, fit_tree_weighted, tree_classify, DecisionTree, TreeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combiner {
    /// Sign of the sum of member votes; a tied vote goes to +1.
    MajorityVote,
    /// Sign of the mean member score; 0 goes to +1.
    MeanScore,
}

/// The combined real-valued output: the vote difference for
/// `MajorityVote`, the mean score for `MeanScore`.
pub fn combined_score(scores: &[f64], combiner: Combiner) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Argument("cannot combine zero member outputs".into()));
    }
    Ok(match combiner {
        Combiner::MajorityVote => scores.iter().map(|&s| Label::from_score(s).sign()).sum(),
        Combiner::MeanScore => scores.iter().sum::<f64>() / scores.len() as f64,
    })
}

pub fn combine(scores: &[f64], combiner: Combiner) -> Result<Label> {
    Ok(Label::from_score(combined_score(scores, combiner)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble<M = DecisionTree> {
    pub members: Vec<M>,
    /// Feature indices each member sees, when members work on subspaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<Vec<Vec<usize>>>,
    pub combiner: Combiner,
    pub dim: usize,
}

impl<M: DecisionFunction> Ensemble<M> {
    pub fn new(members: Vec<M>, masks: Option<Vec<Vec<usize>>>, combiner: Combiner, dim: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Argument("an ensemble needs at least one member".into()));
        }
        match &masks {
            Some(masks) => {
                if masks.len() != members.len() {
                    return Err(Error::Argument("one mask per member is required".into()));
                }
                for (m, mask) in members.iter().zip(masks) {
                    if mask.is_empty() || mask.iter().any(|&j| j >= dim) || m.dim() != mask.len() {
                        return Err(Error::Argument(format!("invalid feature mask {mask:?}")));
                    }
                }
            }
            None => {
                if members.iter().any(|m| m.dim() != dim) {
                    return Err(Error::Argument("member dimensions differ from the ensemble's".into()));
                }
            }
        }
        Ok(Ensemble { members, masks, combiner, dim })
    }

    pub fn member_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        match &self.masks {
            None => self.members.iter().map(|m| m.score(x)).collect(),
            Some(masks) => {
                let mut sub = Vec::new();
                self.members
                    .iter()
                    .zip(masks)
                    .map(|(m, mask)| {
                        sub.clear();
                        sub.extend(mask.iter().map(|&j| x[j]));
                        m.score(&sub)
                    })
                    .collect()
            }
        }
    }
}

impl<M: DecisionFunction> DecisionFunction for Ensemble<M> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        combined_score(&self.member_scores(x)?, self.combiner)
    }
}

/// Trees fit on bootstrap samples; member `r` uses `seed + r`.
pub fn bagging(ds: &LabeledDataset, base: TreeConfig, m_rounds: usize, seed: Seed) -> Result<Ensemble> {
    if m_rounds == 0 {
        return Err(Error::Argument("m_rounds must be >= 1".into()));
    }
    let members = (0..m_rounds as u64)
        .into_par_iter()
        .map(|r| {
            let sample = bootstrap_sample(ds, seed.offset(r))?;
            fit_tree(&ds.subset(&sample.indices)?, base)
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members, None, Combiner::MajorityVote, ds.dim())
}

/// Trees fit on all samples but only `subspace_dim` uniformly drawn
/// features each; member `r` draws its features with `seed + r`.
pub fn random_subspace(
    ds: &LabeledDataset,
    base: TreeConfig,
    m_rounds: usize,
    subspace_dim: usize,
    seed: Seed,
) -> Result<Ensemble> {
    let d = ds.dim();
    if subspace_dim == 0 || subspace_dim > d {
        return Err(Error::Argument(format!("subspace_dim {subspace_dim} must lie in 1..={d}")));
    }
    if m_rounds == 0 {
        return Err(Error::Argument("m_rounds must be >= 1".into()));
    }
    let fitted = (0..m_rounds as u64)
        .into_par_iter()
        .map(|r| {
            let mut mask = index::sample(&mut seed.offset(r).rng(), d, subspace_dim).into_vec();
            mask.sort_unstable();
            let tree = fit_tree(&ds.select_features(&mask)?, base)?;
            Ok((tree, mask))
        })
        .collect::<Result<Vec<_>>>()?;
    let (members, masks) = fitted.into_iter().unzip();
    Ensemble::new(members, Some(masks), Combiner::MajorityVote, d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    pub stump: DecisionTree,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub rounds: Vec<BoostRound>,
    pub dim: usize,
}

/// Per-round diagnostics of an AdaBoost run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostRoundTrace {
    pub weighted_error: f64,
    pub alpha: f64,
    /// Instance weights the stump was fit on.
    pub weights_before: Vec<f64>,
    /// Weights after the multiplicative update; equal to `weights_before`
    /// on the round that stopped the run.
    pub weights_after: Vec<f64>,
}

const EPS_FLOOR: f64 = 1e-10;

fn capped_alpha() -> f64 {
    0.5 * ((1.0 - EPS_FLOOR) / EPS_FLOOR).ln()
}

/// Discrete AdaBoost with depth-1 trees. Stops early when a stump is no
/// better than chance (`eps >= 1/2 - 1e-10`, kept with alpha 0) or perfect
/// (`eps <= 1e-10`, kept with alpha capped at `ln((1 - 1e-10) / 1e-10) / 2`).
pub fn adaboost_with_trace(ds: &LabeledDataset, t_rounds: usize) -> Result<(BoostModel, Vec<BoostRoundTrace>)> {
    if t_rounds == 0 {
        return Err(Error::Argument("t_rounds must be >= 1".into()));
    }
    let n = ds.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut rounds = Vec::new();
    let mut trace = Vec::new();
    for _ in 0..t_rounds {
        let stump = fit_tree_weighted(ds, &w, TreeConfig::stump())?;
        let h: Vec<f64> = ds.rows().map(|x| tree_classify(&stump, x).map(Label::sign)).collect::<Result<_>>()?;
        let eps: f64 = (0..n).filter(|&i| h[i] != ds.label(i).sign()).map(|i| w[i]).sum();
        let before = w.clone();
        let (alpha, stop) = if eps >= 0.5 - EPS_FLOOR {
            (0.0, true)
        } else if eps <= EPS_FLOOR {
            (capped_alpha(), true)
        } else {
            (0.5 * ((1.0 - eps) / eps).ln(), false)
        };
        if !stop {
            for i in 0..n {
                w[i] *= (-alpha * ds.label(i).sign() * h[i]).exp();
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
        }
        trace.push(BoostRoundTrace { weighted_error: eps, alpha, weights_before: before, weights_after: w.clone() });
        rounds.push(BoostRound { stump, alpha });
        if stop {
            break;
        }
    }
    Ok((BoostModel { rounds, dim: ds.dim() }, trace))
}

pub fn adaboost(ds: &LabeledDataset, t_rounds: usize) -> Result<BoostModel> {
    Ok(adaboost_with_trace(ds, t_rounds)?.0)
}

pub fn boost_score(model: &BoostModel, x: &[f64]) -> Result<f64> {
    check_dim(model.dim, x.len())?;
    let mut s = 0.0;
    for r in &model.rounds {
        s += r.alpha * tree_classify(&r.stump, x)?.sign();
    }
    Ok(s)
}

impl BoostModel {
    /// The model restricted to its first `t` rounds.
    pub fn truncated(&self, t: usize) -> BoostModel {
        BoostModel { rounds: self.rounds[..t.min(self.rounds.len())].to_vec(), dim: self.dim }
    }
}

impl DecisionFunction for BoostModel {
    fn dim(&self) -> usize {
        self.dim
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        boost_score(self, x)
    }
}
