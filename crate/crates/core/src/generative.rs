//! Generative classifiers: linear discriminant analysis with maximum
//! likelihood estimates, and the Parzen (kernel density) classifier.
//!
//! Both score a point by the log ratio of the estimated joint densities,
//! `log(pi_+ p(x|+)) - log(pi_- p(x|-))`, so a positive score means the
//! positive class is more probable.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classifier::DecisionFunction;
use crate::data::{Label, LabeledDataset};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, log_sum_exp, spd_factor, sq_dist};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaOptions {
    /// Priors `(N_c + 1) / (N + 2)` instead of `N_c / N`.
    pub laplace_priors: bool,
    /// Scale the pooled covariance by `N / (N - 2)`.
    pub unbiased_cov: bool,
    /// Added to the pooled covariance diagonal before inversion.
    pub ridge_cov: f64,
}

/// Fitted LDA: class priors and means, pooled covariance, and the affine
/// decision function `weight . x + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub prior_pos: f64,
    pub prior_neg: f64,
    pub mean_pos: Vec<f64>,
    pub mean_neg: Vec<f64>,
    /// Row-major `d x d`, including any ridge term.
    pub pooled_cov: Vec<f64>,
    pub weight: Vec<f64>,
    pub offset: f64,
}

fn class_means(ds: &LabeledDataset) -> (Vec<f64>, Vec<f64>, usize, usize) {
    let d = ds.dim();
    let mut mp = vec![0.0; d];
    let mut mn = vec![0.0; d];
    let (mut np, mut nn) = (0usize, 0usize);
    for (i, r) in ds.rows().enumerate() {
        let (m, c) = match ds.label(i) {
            Label::Pos => (&mut mp, &mut np),
            Label::Neg => (&mut mn, &mut nn),
        };
        *c += 1;
        for (a, v) in m.iter_mut().zip(r) {
            *a += v;
        }
    }
    mp.iter_mut().for_each(|v| *v /= np.max(1) as f64);
    mn.iter_mut().for_each(|v| *v /= nn.max(1) as f64);
    (mp, mn, np, nn)
}

pub fn fit_lda(ds: &LabeledDataset, options: LdaOptions) -> Result<LdaModel> {
    let (mean_pos, mean_neg, np, nn) = class_means(ds);
    if np == 0 || nn == 0 {
        return Err(Error::Fit("LDA needs samples from both classes".into()));
    }
    if options.ridge_cov < 0.0 || !options.ridge_cov.is_finite() {
        return Err(Error::Argument("ridge_cov must be a nonnegative number".into()));
    }
    let n = ds.len();
    let d = ds.dim();
    let (prior_pos, prior_neg) = if options.laplace_priors {
        ((np + 1) as f64 / (n + 2) as f64, (nn + 1) as f64 / (n + 2) as f64)
    } else {
        (np as f64 / n as f64, nn as f64 / n as f64)
    };

    let mut cov = DMatrix::<f64>::zeros(d, d);
    for (i, r) in ds.rows().enumerate() {
        let m = match ds.label(i) {
            Label::Pos => &mean_pos,
            Label::Neg => &mean_neg,
        };
        let c = DVector::from_iterator(d, r.iter().zip(m).map(|(x, m)| x - m));
        cov.ger(1.0, &c, &c, 1.0);
    }
    cov /= n as f64;
    if options.unbiased_cov {
        if n <= 2 {
            return Err(Error::Fit("unbiased covariance needs N > 2".into()));
        }
        cov *= n as f64 / (n - 2) as f64;
    }
    for j in 0..d {
        cov[(j, j)] += options.ridge_cov;
    }

    let chol = spd_factor(&cov, "use ridge_cov > 0")?;
    let mp = DVector::from_column_slice(&mean_pos);
    let mn = DVector::from_column_slice(&mean_neg);
    let weight = chol.solve(&(&mp - &mn));
    // log g(0 | mu, S) up to the shared normalizer; the determinant and
    // dimension terms cancel in the difference but are kept explicit.
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let log_g0 = |m: &DVector<f64>| -0.5 * (d as f64 * LN_2PI + log_det + m.dot(&chol.solve(m)));
    let offset = (prior_pos.ln() + log_g0(&mp)) - (prior_neg.ln() + log_g0(&mn));

    Ok(LdaModel {
        prior_pos,
        prior_neg,
        mean_pos,
        mean_neg,
        pooled_cov: cov.transpose().as_slice().to_vec(),
        weight: weight.as_slice().to_vec(),
        offset,
    })
}

impl LdaModel {
    pub fn dim(&self) -> usize {
        self.weight.len()
    }

    /// Sum over the data of `log pi_y + log g(x | mu_y, S)` under this model's
    /// parameters.
    pub fn log_likelihood(&self, ds: &LabeledDataset) -> Result<f64> {
        check_dim(self.dim(), ds.dim())?;
        let d = self.dim();
        let cov = DMatrix::from_row_slice(d, d, &self.pooled_cov);
        let chol = spd_factor(&cov, "covariance not positive definite")?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let mut total = 0.0;
        for (i, r) in ds.rows().enumerate() {
            let (prior, m) = match ds.label(i) {
                Label::Pos => (self.prior_pos, &self.mean_pos),
                Label::Neg => (self.prior_neg, &self.mean_neg),
            };
            let c = DVector::from_iterator(d, r.iter().zip(m).map(|(x, m)| x - m));
            let maha = c.dot(&chol.solve(&c));
            total += prior.ln() - 0.5 * (d as f64 * LN_2PI + log_det + maha);
        }
        Ok(total)
    }
}

pub fn lda_decision(model: &LdaModel, x: &[f64]) -> Result<f64> {
    check_dim(model.dim(), x.len())?;
    Ok(dot(&model.weight, x) + model.offset)
}

impl DecisionFunction for LdaModel {
    fn dim(&self) -> usize {
        self.weight.len()
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        lda_decision(self, x)
    }
}

/// Per-class kernel density estimate with a shared isotropic Gaussian kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParzenModel {
    pub bandwidth: f64,
    pub points_pos: Vec<Vec<f64>>,
    pub points_neg: Vec<Vec<f64>>,
    pub prior_pos: f64,
    pub prior_neg: f64,
}

pub fn fit_parzen(ds: &LabeledDataset, bandwidth: f64) -> Result<ParzenModel> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::Argument(format!("bandwidth {bandwidth} must be positive")));
    }
    let mut points_pos = Vec::new();
    let mut points_neg = Vec::new();
    for (i, r) in ds.rows().enumerate() {
        match ds.label(i) {
            Label::Pos => points_pos.push(r.to_vec()),
            Label::Neg => points_neg.push(r.to_vec()),
        }
    }
    if points_pos.is_empty() || points_neg.is_empty() {
        return Err(Error::Fit("Parzen classifier needs samples from both classes".into()));
    }
    let n = ds.len() as f64;
    Ok(ParzenModel {
        bandwidth,
        prior_pos: points_pos.len() as f64 / n,
        prior_neg: points_neg.len() as f64 / n,
        points_pos,
        points_neg,
    })
}

impl ParzenModel {
    pub fn dim(&self) -> usize {
        self.points_pos[0].len()
    }

    /// Log class density up to the normalizer shared by both classes.
    fn log_density(&self, points: &[Vec<f64>], x: &[f64]) -> f64 {
        let inv = 1.0 / (2.0 * self.bandwidth * self.bandwidth);
        log_sum_exp(points.iter().map(|p| -sq_dist(p, x) * inv)) - (points.len() as f64).ln()
    }
}

pub fn parzen_decision(model: &ParzenModel, x: &[f64]) -> Result<f64> {
    check_dim(model.dim(), x.len())?;
    let lp = model.prior_pos.ln() + model.log_density(&model.points_pos, x);
    let ln = model.prior_neg.ln() + model.log_density(&model.points_neg, x);
    Ok(lp - ln)
}

impl DecisionFunction for ParzenModel {
    fn dim(&self) -> usize {
        ParzenModel::dim(self)
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        parzen_decision(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Seed;
    use crate::oracle::GaussianMixtureProblem;

    fn ds_1d(points: &[(f64, i64)]) -> LabeledDataset {
        LabeledDataset::new(
            points.iter().map(|p| vec![p.0]).collect(),
            points.iter().map(|p| Label::from_value(p.1).unwrap()).collect(),
        )
        .unwrap()
    }

    fn hand_example() -> LabeledDataset {
        ds_1d(&[(0.0, 1), (2.0, 1), (4.0, -1), (6.0, -1)])
    }

    #[test]
    fn lda_hand_example() {
        let m = fit_lda(&hand_example(), LdaOptions::default()).unwrap();
        assert_eq!((m.prior_pos, m.prior_neg), (0.5, 0.5));
        assert_eq!((m.mean_pos[0], m.mean_neg[0]), (1.0, 5.0));
        assert_eq!(m.pooled_cov, vec![1.0]);
        // w = (1 - 5) / 1 = -4, c = -(1^2 - 5^2)/2 = 12, boundary at 3.
        assert!((m.weight[0] + 4.0).abs() < 1e-12);
        assert!((m.offset - 12.0).abs() < 1e-12);
        assert!(lda_decision(&m, &[3.0]).unwrap().abs() < 1e-12);
        assert!(lda_decision(&m, &[1.0]).unwrap() > 0.0);
        assert!(lda_decision(&m, &[5.0]).unwrap() < 0.0);
        assert!(lda_decision(&m, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn lda_options() {
        let opts = LdaOptions { laplace_priors: true, ..Default::default() };
        let m = fit_lda(&hand_example(), opts).unwrap();
        assert_eq!(m.prior_pos, 0.5);
        let skewed = ds_1d(&[(0.0, 1), (1.0, -1), (2.0, -1), (3.0, -1)]);
        let m = fit_lda(&skewed, opts).unwrap();
        assert!((m.prior_pos - 2.0 / 6.0).abs() < 1e-15);
        let m = fit_lda(&hand_example(), LdaOptions { unbiased_cov: true, ..Default::default() }).unwrap();
        assert!((m.pooled_cov[0] - 2.0).abs() < 1e-15);
        let m = fit_lda(&hand_example(), LdaOptions { ridge_cov: 0.5, ..Default::default() }).unwrap();
        assert!((m.pooled_cov[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn lda_errors() {
        let one_class = ds_1d(&[(0.0, 1), (1.0, 1)]);
        assert!(matches!(fit_lda(&one_class, LdaOptions::default()), Err(Error::Fit(_))));
        let collapsed = ds_1d(&[(1.0, 1), (3.0, -1)]);
        match fit_lda(&collapsed, LdaOptions::default()) {
            Err(Error::Numeric(m)) => assert!(m.contains("ridge_cov")),
            other => panic!("{other:?}"),
        }
        assert!(fit_lda(&collapsed, LdaOptions { ridge_cov: 0.1, ..Default::default() }).is_ok());
    }

    #[test]
    fn lda_weight_solves_normal_system() {
        let p = GaussianMixtureProblem::isotropic(0.4, vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.0], 1.3).unwrap();
        let ds = p.sample(200, Seed(2)).unwrap();
        let m = fit_lda(&ds, LdaOptions::default()).unwrap();
        let d = m.dim();
        let s = DMatrix::from_row_slice(d, d, &m.pooled_cov);
        let lhs = &s * DVector::from_column_slice(&m.weight);
        let rhs: Vec<f64> = m.mean_pos.iter().zip(&m.mean_neg).map(|(a, b)| a - b).collect();
        let res = (lhs - DVector::from_column_slice(&rhs)).norm() / DVector::from_column_slice(&rhs).norm();
        assert!(res < 1e-8);
        assert!((m.prior_pos + m.prior_neg - 1.0).abs() < 1e-12);
        assert!((&s - s.transpose()).amax() == 0.0);
    }

    #[test]
    fn lda_boundary_is_affine() {
        let p = GaussianMixtureProblem::isotropic(0.5, vec![1.0, 1.0], vec![-1.0, 0.0], 1.0).unwrap();
        let m = fit_lda(&p.sample(100, Seed(9)).unwrap(), LdaOptions::default()).unwrap();
        // Two points on the boundary: solve w0 x + w1 y + c = 0 for x at y = +-3.
        let on = |y: f64| vec![-(m.offset + m.weight[1] * y) / m.weight[0], y];
        let (a, b) = (on(-3.0), on(3.0));
        for t in [0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            let x: Vec<f64> = a.iter().zip(&b).map(|(u, v)| (1.0 - t) * u + t * v).collect();
            assert!(lda_decision(&m, &x).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn lda_mirror_symmetric_midpoint() {
        let pts = [(-3.0, -1), (-1.0, -1), (-2.5, -1), (3.0, 1), (1.0, 1), (2.5, 1)];
        let m = fit_lda(&ds_1d(&pts), LdaOptions::default()).unwrap();
        let mid = 0.5 * (m.mean_pos[0] + m.mean_neg[0]);
        assert!(lda_decision(&m, &[mid]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn lda_maximizes_log_likelihood() {
        let p = GaussianMixtureProblem::new(0.35, vec![1.0, 0.5], vec![-0.5, 0.0], vec![1.0, 0.3, 0.3, 0.8], vec![1.0, 0.3, 0.3, 0.8]).unwrap();
        let ds = p.sample(150, Seed(4)).unwrap();
        let m = fit_lda(&ds, LdaOptions::default()).unwrap();
        let base = m.log_likelihood(&ds).unwrap();
        let mut perturbed = Vec::new();
        for delta in [1e-3, -1e-3] {
            let mut q = m.clone();
            q.prior_pos += delta;
            q.prior_neg -= delta;
            perturbed.push(q);
            for j in 0..2 {
                let mut q = m.clone();
                q.mean_pos[j] += delta;
                perturbed.push(q);
                let mut q = m.clone();
                q.mean_neg[j] += delta;
                perturbed.push(q);
            }
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                let mut q = m.clone();
                q.pooled_cov[i * 2 + j] += delta;
                if i != j {
                    q.pooled_cov[j * 2 + i] += delta;
                }
                perturbed.push(q);
            }
        }
        for q in perturbed {
            assert!(q.log_likelihood(&ds).unwrap() <= base + 1e-12);
        }
    }

    #[test]
    fn parzen_single_points_bisector() {
        let ds = LabeledDataset::new(vec![vec![0.0, 0.0], vec![2.0, 2.0]], vec![Label::Neg, Label::Pos]).unwrap();
        let m = fit_parzen(&ds, 0.7).unwrap();
        assert!(parzen_decision(&m, &[1.0, 1.0]).unwrap().abs() < 1e-12);
        // Every point of the perpendicular bisector x + y = 2 scores 0.
        for t in [-3.0, 0.5, 4.0] {
            assert!(parzen_decision(&m, &[t, 2.0 - t]).unwrap().abs() < 1e-9);
        }
        assert!(parzen_decision(&m, &[1.5, 1.0]).unwrap() > 0.0);
    }

    #[test]
    fn parzen_far_query_is_finite_and_exact() {
        let ds = LabeledDataset::new(vec![vec![0.0], vec![1.0], vec![3.0]], vec![Label::Neg, Label::Neg, Label::Pos]).unwrap();
        let h = 0.1;
        let m = fit_parzen(&ds, h).unwrap();
        let x = 1000.0f64;
        let s = parzen_decision(&m, &[x]).unwrap();
        assert!(s.is_finite());
        // Second route: factor out the nearest negative point's exponent by hand.
        let e = |p: f64| -(x - p).powi(2) / (2.0 * h * h);
        let log_neg = e(1.0) + (1.0 + (e(0.0) - e(1.0)).exp()).ln() - 2f64.ln();
        let expected = (1.0f64 / 3.0).ln() + e(3.0) - ((2.0f64 / 3.0).ln() + log_neg);
        assert!((s - expected).abs() < 1e-9 * expected.abs());
    }

    #[test]
    fn parzen_wide_kernel_follows_prior() {
        let ds = ds_1d(&[(0.0, -1), (1.0, -1), (2.0, -1), (3.0, 1), (10.0, 1)]);
        let m = fit_parzen(&ds, 1e6).unwrap();
        for x in [-5.0, 0.0, 3.0, 10.0, 50.0] {
            let s = parzen_decision(&m, &[x]).unwrap();
            assert!(s < 0.0);
            assert!((s - (2.0f64 / 3.0).ln()).abs() < 1e-6);
        }
    }

    #[test]
    fn parzen_tight_kernel_is_one_nn_on_training_points() {
        let p = GaussianMixtureProblem::symmetric_1d();
        let ds = p.sample(60, Seed(12)).unwrap();
        let m = fit_parzen(&ds, 1e-4).unwrap();
        for (i, r) in ds.rows().enumerate() {
            assert_eq!(m.classify(r).unwrap(), ds.label(i));
        }
        let q = ds_1d(&[(0.0, 1), (0.05, -1), (1.0, -1), (1.1, 1)]);
        let m = fit_parzen(&q, 0.01).unwrap();
        assert_eq!(m.classify(&[0.0]).unwrap(), Label::Pos);
    }

    #[test]
    fn parzen_duplicating_positives_changes_nothing_but_prior() {
        let ds = ds_1d(&[(0.0, -1), (1.0, 1), (2.0, -1), (2.5, 1)]);
        let m = fit_parzen(&ds, 0.8).unwrap();
        let mut pts: Vec<(f64, i64)> = vec![(0.0, -1), (1.0, 1), (2.0, -1), (2.5, 1)];
        pts.extend([(1.0, 1), (2.5, 1)]);
        let dup = fit_parzen(&ds_1d(&pts), 0.8).unwrap();
        for x in [-1.0, 0.7, 1.9, 3.0] {
            let a = parzen_decision(&m, &[x]).unwrap();
            let b = parzen_decision(&dup, &[x]).unwrap() - (dup.prior_pos / dup.prior_neg).ln();
            assert!((a - (m.prior_pos / m.prior_neg).ln() - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parzen_errors() {
        let ds = hand_example();
        assert!(matches!(fit_parzen(&ds, 0.0), Err(Error::Argument(_))));
        assert!(matches!(fit_parzen(&ds, -1.0), Err(Error::Argument(_))));
        let one_class = ds_1d(&[(0.0, 1), (1.0, 1)]);
        assert!(fit_parzen(&one_class, 1.0).is_err());
        let m = fit_parzen(&ds, 1.0).unwrap();
        assert!(parzen_decision(&m, &[1.0, 2.0]).is_err());
    }
}
