//! The two contracts shared by every learner: a [`DecisionFunction`] scores
//! points and classifies by sign, a [`Trainer`] turns a dataset into one.

use std::sync::Arc;

use crate::data::{Label, LabeledDataset, Seed};
use crate::error::{check_dim, Result};

/// Real-valued score `h(x)`; the predicted label is `sign(h(x))` with `0 -> +1`.
pub trait DecisionFunction: Send + Sync {
    /// Input dimension the function accepts.
    fn dim(&self) -> usize;

    fn score(&self, x: &[f64]) -> Result<f64>;

    fn classify(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_score(self.score(x)?))
    }
}

impl<T: DecisionFunction + ?Sized> DecisionFunction for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        (**self).score(x)
    }
    fn classify(&self, x: &[f64]) -> Result<Label> {
        (**self).classify(x)
    }
}

impl<T: DecisionFunction + ?Sized> DecisionFunction for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        (**self).score(x)
    }
    fn classify(&self, x: &[f64]) -> Result<Label> {
        (**self).classify(x)
    }
}

impl<T: DecisionFunction + ?Sized> DecisionFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        (**self).score(x)
    }
    fn classify(&self, x: &[f64]) -> Result<Label> {
        (**self).classify(x)
    }
}

/// Fits a decision function to a dataset. `seed` feeds randomized learners;
/// deterministic learners ignore it.
pub trait Trainer: Send + Sync {
    fn name(&self) -> String;

    fn train(&self, ds: &LabeledDataset, seed: Seed) -> Result<Box<dyn DecisionFunction>>;
}

/// Predicts the same label everywhere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant {
    pub label: Label,
    pub dim: usize,
}

impl DecisionFunction for Constant {
    fn dim(&self) -> usize {
        self.dim
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.label.sign())
    }
}

/// Negated score of the wrapped function, so every prediction flips except
/// exact zeros.
#[derive(Clone, Debug)]
pub struct Negated<C>(pub C);

impl<C: DecisionFunction> DecisionFunction for Negated<C> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.0.score(x)?)
    }
    fn classify(&self, x: &[f64]) -> Result<Label> {
        Ok(self.0.classify(x)?.flip())
    }
}

/// Adapts a closure into a decision function.
pub struct ScoreFn<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> ScoreFn<F> {
    pub fn new(dim: usize, f: F) -> Self {
        ScoreFn { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> DecisionFunction for ScoreFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok((self.f)(x))
    }
}

/// Adapts a closure into a trainer.
pub struct FnTrainer<F> {
    name: String,
    f: F,
}

impl<F> FnTrainer<F>
where
    F: Fn(&LabeledDataset, Seed) -> Result<Box<dyn DecisionFunction>> + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnTrainer {
            name: name.into(),
            f,
        }
    }
}

impl<F> Trainer for FnTrainer<F>
where
    F: Fn(&LabeledDataset, Seed) -> Result<Box<dyn DecisionFunction>> + Send + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }
    fn train(&self, ds: &LabeledDataset, seed: Seed) -> Result<Box<dyn DecisionFunction>> {
        (self.f)(ds, seed)
    }
}
