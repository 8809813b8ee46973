//! Two-class supervised classification toolkit.
//!
//! Every classifier produces a real-valued score `h(x)` and classifies by its
//! sign, with a score of exactly zero mapped to `+1`. The [`oracle`] module
//! supplies Gaussian problems whose Bayes decision and Bayes error are known,
//! so the learners and error estimators can be checked against ground truth.
//!
//! Module map:
//!
//! - [`data`]: datasets, CSV ingestion, holdout splits, folds, bootstrap draws.
//! - [`oracle`]: Gaussian mixture problems, Bayes classifier, Bayes error.
//! - [`generative`]: LDA and the Parzen classifier.
//! - [`losses`]: margin-based losses and their (sub)gradients.
//! - [`linear`]: regularized empirical risk minimization over linear hypotheses.
//! - [`kernel`]: kernels, kernel ridge machines, dissimilarity representation.
//! - [`neighbors`] / [`tree`]: k-nearest neighbors and decision trees.
//! - [`ensemble`]: bagging, random subspaces, fixed combiners, AdaBoost.
//! - [`neural`]: one-hidden-layer network trained by backpropagation.
//! - [`features`]: feature transforms and forward selection.
//! - [`evaluation`]: error estimators, learning and feature curves.
//! - [`registry`]: named trainer specifications and serializable models.

pub mod classifier;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod generative;
pub mod kernel;
pub mod linalg;
pub mod linear;
pub mod losses;
pub mod neighbors;
pub mod neural;
pub mod oracle;
pub mod registry;
pub mod tree;

pub use classifier::{DecisionFunction, Trainer};
pub use data::{Label, LabeledDataset, Seed};
pub use error::{Error, Result};
