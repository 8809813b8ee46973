//! Synthetic two-class Gaussian problems with exactly known joint density.
//!
//! A [`GaussianMixtureProblem`] draws labels from `Bernoulli(prior_pos)` and
//! features from the class Gaussian. Because the joint density is known, the
//! Bayes decision is available pointwise and the error of any classifier can
//! be estimated by Monte Carlo against fresh draws. For one-dimensional
//! problems the Bayes error also has a closed form through the normal CDF.
//!
//! Monte-Carlo work is cut into fixed-size chunks, each with its own seed
//! derived from `(seed, chunk index)`. Chunks run in parallel; since each one
//! only contributes an integer count the result equals the sequential run.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::classifier::DecisionFunction;
use crate::data::{Label, LabeledDataset, Seed};
use crate::error::{check_dim, Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const MC_CHUNK: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq)]
struct ClassGaussian {
    mean: Vec<f64>,
    cov: Vec<f64>,
    /// Lower Cholesky factor, row-major.
    chol: Vec<f64>,
    log_det: f64,
}

impl ClassGaussian {
    fn new(mean: Vec<f64>, cov: Vec<f64>, which: &str) -> Result<ClassGaussian> {
        let d = mean.len();
        if cov.len() != d * d {
            return Err(Error::Argument(format!(
                "{which} covariance has {} entries, expected {}",
                cov.len(),
                d * d
            )));
        }
        if mean.iter().chain(&cov).any(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("{which} parameters must be finite")));
        }
        let m = DMatrix::from_row_slice(d, d, &cov);
        let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if (&m - m.transpose()).iter().any(|v| v.abs() > 1e-12 * scale.max(1.0)) {
            return Err(Error::Argument(format!("{which} covariance is not symmetric")));
        }
        let min_eig = m.clone().symmetric_eigen().eigenvalues.min();
        if min_eig <= 0.0 {
            return Err(Error::Argument(format!(
                "{which} covariance is not positive definite (min eigenvalue {min_eig})"
            )));
        }
        let l = nalgebra::Cholesky::new(m)
            .ok_or_else(|| Error::Argument(format!("{which} covariance is not positive definite")))?
            .l();
        let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let mut chol = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                chol[i * d + j] = l[(i, j)];
            }
        }
        Ok(ClassGaussian {
            mean,
            cov,
            chol,
            log_det,
        })
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `log g(x | mean, cov)`.
    fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        // Mahalanobis term via forward substitution L z = x - mean.
        let mut z = [0.0f64; 16];
        let mut heap;
        let z: &mut [f64] = if d <= 16 {
            &mut z[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut maha = 0.0;
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for j in 0..i {
                s -= self.chol[i * d + j] * z[j];
            }
            z[i] = s / self.chol[i * d + i];
            maha += z[i] * z[i];
        }
        -0.5 * (d as f64 * LN_2PI + self.log_det + maha)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..d {
            let mut v = self.mean[i];
            for j in 0..=i {
                v += self.chol[i * d + j] * z[j];
            }
            out.push(v);
        }
    }
}

/// Two Gaussian classes with prior `prior_pos` for the positive class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemSpec", into = "ProblemSpec")]
pub struct GaussianMixtureProblem {
    prior_pos: f64,
    pos: ClassGaussian,
    neg: ClassGaussian,
}

/// Covariance as written in a problem file: a list of rows or a flat
/// row-major list.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum CovSpec {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl CovSpec {
    fn into_flat(self) -> Vec<f64> {
        match self {
            CovSpec::Rows(r) => r.into_iter().flatten().collect(),
            CovSpec::Flat(f) => f,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSpec {
    prior_pos: f64,
    mean_pos: Vec<f64>,
    mean_neg: Vec<f64>,
    cov_pos: CovSpec,
    cov_neg: CovSpec,
}

impl TryFrom<ProblemSpec> for GaussianMixtureProblem {
    type Error = Error;

    fn try_from(s: ProblemSpec) -> Result<Self> {
        GaussianMixtureProblem::new(
            s.prior_pos,
            s.mean_pos,
            s.mean_neg,
            s.cov_pos.into_flat(),
            s.cov_neg.into_flat(),
        )
    }
}

impl From<GaussianMixtureProblem> for ProblemSpec {
    fn from(p: GaussianMixtureProblem) -> ProblemSpec {
        let d = p.dim();
        let rows = |c: &[f64]| CovSpec::Rows(c.chunks(d).map(|r| r.to_vec()).collect());
        ProblemSpec {
            prior_pos: p.prior_pos,
            cov_pos: rows(&p.pos.cov),
            cov_neg: rows(&p.neg.cov),
            mean_pos: p.pos.mean,
            mean_neg: p.neg.mean,
        }
    }
}

impl GaussianMixtureProblem {
    /// Covariances are given row-major.
    pub fn new(
        prior_pos: f64,
        mean_pos: Vec<f64>,
        mean_neg: Vec<f64>,
        cov_pos: Vec<f64>,
        cov_neg: Vec<f64>,
    ) -> Result<GaussianMixtureProblem> {
        if !(0.0..=1.0).contains(&prior_pos) {
            return Err(Error::Argument(format!("prior_pos {prior_pos} is not in [0, 1]")));
        }
        if mean_pos.is_empty() || mean_pos.len() != mean_neg.len() {
            return Err(Error::Argument(format!(
                "class means have dimensions {} and {}",
                mean_pos.len(),
                mean_neg.len()
            )));
        }
        Ok(GaussianMixtureProblem {
            prior_pos,
            pos: ClassGaussian::new(mean_pos, cov_pos, "positive")?,
            neg: ClassGaussian::new(mean_neg, cov_neg, "negative")?,
        })
    }

    /// Both classes with covariance `sigma^2 I`.
    pub fn isotropic(
        prior_pos: f64,
        mean_pos: Vec<f64>,
        mean_neg: Vec<f64>,
        sigma: f64,
    ) -> Result<GaussianMixtureProblem> {
        let d = mean_pos.len();
        let cov = identity_flat(d, sigma * sigma);
        GaussianMixtureProblem::new(prior_pos, mean_pos, mean_neg, cov.clone(), cov)
    }

    /// Equal priors, means `+-1`, unit variance; Bayes error `Phi(-1)`.
    pub fn symmetric_1d() -> GaussianMixtureProblem {
        GaussianMixtureProblem::isotropic(0.5, vec![1.0], vec![-1.0], 1.0).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.pos.dim()
    }

    pub fn prior_pos(&self) -> f64 {
        self.prior_pos
    }

    pub fn prior_neg(&self) -> f64 {
        1.0 - self.prior_pos
    }

    pub fn mean(&self, label: Label) -> &[f64] {
        &self.class(label).mean
    }

    /// Row-major covariance of the class.
    pub fn cov(&self, label: Label) -> &[f64] {
        &self.class(label).cov
    }

    fn class(&self, label: Label) -> &ClassGaussian {
        match label {
            Label::Pos => &self.pos,
            Label::Neg => &self.neg,
        }
    }

    fn prior(&self, label: Label) -> f64 {
        match label {
            Label::Pos => self.prior_pos,
            Label::Neg => 1.0 - self.prior_pos,
        }
    }

    /// `log(prior_c * g(x | mean_c, cov_c))`; `-inf` for a zero prior.
    pub fn log_joint(&self, x: &[f64], label: Label) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.prior(label).ln() + self.class(label).log_density(x))
    }

    /// Same problem with `extra` appended features that are standard normal
    /// and independent of the label in both classes.
    pub fn with_noise_dims(&self, extra: usize) -> GaussianMixtureProblem {
        let pad = |c: &ClassGaussian| {
            let d = c.dim();
            let nd = d + extra;
            let mut mean = c.mean.clone();
            mean.resize(nd, 0.0);
            let mut cov = identity_flat(nd, 1.0);
            for i in 0..d {
                for j in 0..d {
                    cov[i * nd + j] = c.cov[i * d + j];
                }
            }
            (mean, cov)
        };
        let (mp, cp) = pad(&self.pos);
        let (mn, cn) = pad(&self.neg);
        GaussianMixtureProblem::new(self.prior_pos, mp, mn, cp, cn)
            .expect("padding a valid problem keeps it valid")
    }

    fn draw_into(&self, rng: &mut ChaCha8Rng, features: &mut Vec<f64>) -> Label {
        let label = if rng.random::<f64>() < self.prior_pos {
            Label::Pos
        } else {
            Label::Neg
        };
        self.class(label).draw(rng, features);
        label
    }

    /// `n` i.i.d. draws from the joint distribution.
    pub fn sample(&self, n: usize, seed: Seed) -> Result<LabeledDataset> {
        if n == 0 {
            return Err(Error::Argument("sample size must be positive".into()));
        }
        let mut rng = seed.rng();
        let mut features = Vec::with_capacity(n * self.dim());
        let labels = (0..n).map(|_| self.draw_into(&mut rng, &mut features)).collect();
        LabeledDataset::from_flat(features, self.dim(), labels)
    }

    /// Counts draws for which `hit(x, y)` is true over `n_mc` chunk-seeded draws.
    pub fn monte_carlo_count<F>(&self, n_mc: usize, seed: Seed, hit: F) -> Result<usize>
    where
        F: Fn(&[f64], Label) -> Result<bool> + Sync,
    {
        let chunks = n_mc.div_ceil(MC_CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let len = MC_CHUNK.min(n_mc - c * MC_CHUNK);
                let mut rng = seed.derive(c as u64).rng();
                let mut x = Vec::with_capacity(self.dim());
                let mut count = 0usize;
                for _ in 0..len {
                    x.clear();
                    let y = self.draw_into(&mut rng, &mut x);
                    if hit(&x, y)? {
                        count += 1;
                    }
                }
                Ok(count)
            })
            .collect::<Result<Vec<usize>>>()
            .map(|v| v.into_iter().sum())
    }

    pub fn bayes_classifier(&self) -> BayesClassifier {
        BayesClassifier {
            problem: self.clone(),
        }
    }
}

/// Points around the corners of the unit square labelled like XOR: `(0,0)`
/// and `(1,1)` negative, `(0,1)` and `(1,0)` positive. `counts` gives the
/// number of points per corner in that order; each point is the corner plus
/// uniform jitter in `[-spread, spread]^2`. Rows are grouped by corner.
pub fn xor_layout(counts: [usize; 4], spread: f64, seed: Seed) -> Result<LabeledDataset> {
    const CORNERS: [([f64; 2], Label); 4] = [
        ([0.0, 0.0], Label::Neg),
        ([1.0, 1.0], Label::Neg),
        ([0.0, 1.0], Label::Pos),
        ([1.0, 0.0], Label::Pos),
    ];
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::Argument("spread must be >= 0".into()));
    }
    let mut rng = seed.rng();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (&(c, y), &n) in CORNERS.iter().zip(&counts) {
        for _ in 0..n {
            let mut jitter = || if spread > 0.0 { rng.random_range(-spread..=spread) } else { 0.0 };
            rows.push(vec![c[0] + jitter(), c[1] + jitter()]);
            labels.push(y);
        }
    }
    LabeledDataset::new(rows, labels)
}

fn identity_flat(d: usize, diag: f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = diag;
    }
    m
}

/// The Bayes-optimal rule of a problem: `-1` iff the negative joint density
/// strictly exceeds the positive one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesClassifier {
    pub problem: GaussianMixtureProblem,
}

impl DecisionFunction for BayesClassifier {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    /// Log joint-density ratio `log p(x,+1) - log p(x,-1)`.
    fn score(&self, x: &[f64]) -> Result<f64> {
        let lp = self.problem.log_joint(x, Label::Pos)?;
        let ln = self.problem.log_joint(x, Label::Neg)?;
        Ok(if lp == ln { 0.0 } else { lp - ln })
    }
}

pub fn bayes_classify(problem: &GaussianMixtureProblem, x: &[f64]) -> Result<Label> {
    let lp = problem.log_joint(x, Label::Pos)?;
    let ln = problem.log_joint(x, Label::Neg)?;
    Ok(if ln > lp { Label::Neg } else { Label::Pos })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BayesErrorMethod {
    ClosedForm1d,
    MonteCarlo { n_mc: usize, seed: Seed },
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Mass of `N(mean, sd^2)` on `(lo, hi)`.
fn normal_mass(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    // Use the upper tail when both ends are above the mean to keep precision.
    if a > 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    }
}

/// Real roots of `a x^2 + b x + c`, sorted; a negligible `a` is treated as linear.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Numerically stable pair.
    let q = -0.5 * (b + b.signum() * sq);
    let mut r = if q == 0.0 {
        vec![0.0]
    } else {
        vec![q / a, c / q]
    };
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r.dedup();
    r
}

/// Bayes error of a one-dimensional problem: integrates the pointwise minimum
/// of the two weighted densities, split at their crossing points.
fn bayes_error_1d(p: &GaussianMixtureProblem) -> f64 {
    let (pp, pn) = (p.prior_pos, 1.0 - p.prior_pos);
    if pp == 0.0 || pn == 0.0 {
        return 0.0;
    }
    let (mp, mn) = (p.pos.mean[0], p.neg.mean[0]);
    let (vp, vn) = (p.pos.cov[0], p.neg.cov[0]);
    let (sp, sn) = (vp.sqrt(), vn.sqrt());
    // log(pp g+) - log(pn g-) = A x^2 + B x + C
    let a = -0.5 / vp + 0.5 / vn;
    let b = mp / vp - mn / vn;
    let c = -0.5 * mp * mp / vp + 0.5 * mn * mn / vn + (pp / pn).ln() - (sp / sn).ln();
    let roots = quadratic_roots(a, b, c);
    let mut cuts = vec![f64::NEG_INFINITY];
    cuts.extend(roots.iter().cloned());
    cuts.push(f64::INFINITY);
    let mut err = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let probe = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            (false, false) => 0.0,
        };
        // The decision is constant between crossings; bill the losing class.
        err += match bayes_classify(p, &[probe]).unwrap() {
            Label::Pos => pn * normal_mass(mn, sn, lo, hi),
            Label::Neg => pp * normal_mass(mp, sp, lo, hi),
        };
    }
    err
}

pub fn bayes_error(problem: &GaussianMixtureProblem, method: BayesErrorMethod) -> Result<f64> {
    match method {
        BayesErrorMethod::ClosedForm1d => {
            if problem.dim() != 1 {
                return Err(Error::Unsupported(format!(
                    "closed-form Bayes error needs d = 1, problem has d = {}",
                    problem.dim()
                )));
            }
            Ok(bayes_error_1d(problem))
        }
        BayesErrorMethod::MonteCarlo { n_mc, seed } => {
            if n_mc == 0 {
                return Err(Error::Argument("n_mc must be positive".into()));
            }
            let wrong =
                problem.monte_carlo_count(n_mc, seed, |x, y| Ok(bayes_classify(problem, x)? != y))?;
            Ok(wrong as f64 / n_mc as f64)
        }
    }
}

/// Monte-Carlo estimate of the misclassification probability of `classifier`.
pub fn true_error(
    classifier: &dyn DecisionFunction,
    problem: &GaussianMixtureProblem,
    n_mc: usize,
    seed: Seed,
) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::Argument("n_mc must be positive".into()));
    }
    check_dim(problem.dim(), classifier.dim())?;
    let wrong = problem.monte_carlo_count(n_mc, seed, |x, y| Ok(classifier.classify(x)? != y))?;
    Ok(wrong as f64 / n_mc as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{Constant, Negated};

    fn mc_tol(eps: f64, n: usize) -> f64 {
        3.0 * (eps * (1.0 - eps) / n as f64).sqrt()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GaussianMixtureProblem::isotropic(1.5, vec![0.0], vec![1.0], 1.0).is_err());
        assert!(GaussianMixtureProblem::new(0.5, vec![0.0], vec![0.0, 1.0], vec![1.0], vec![1.0]).is_err());
        let not_pd = vec![1.0, 2.0, 2.0, 1.0];
        assert!(GaussianMixtureProblem::new(0.5, vec![0.0; 2], vec![1.0; 2], not_pd.clone(), not_pd).is_err());
        let asym = vec![1.0, 0.1, 0.0, 1.0];
        assert!(GaussianMixtureProblem::new(0.5, vec![0.0; 2], vec![1.0; 2], asym.clone(), asym).is_err());
    }

    #[test]
    fn degenerate_prior_gives_one_class() {
        let p = GaussianMixtureProblem::isotropic(1.0, vec![0.0], vec![1.0], 1.0).unwrap();
        let ds = p.sample(100, Seed(3)).unwrap();
        assert_eq!(ds.n_pos(), 100);
        assert!(p.sample(0, Seed(3)).is_err());
    }

    #[test]
    fn class_balance_concentrates() {
        let p = GaussianMixtureProblem::symmetric_1d();
        let ds = p.sample(10_000, Seed(11)).unwrap();
        let frac = ds.n_pos() as f64 / 10_000.0;
        assert!((frac - 0.5).abs() <= 0.02, "{frac}");
    }

    #[test]
    fn class_means_concentrate() {
        let p = GaussianMixtureProblem::isotropic(0.5, vec![5.0], vec![-5.0], 1.0).unwrap();
        let ds = p.sample(20_000, Seed(5)).unwrap();
        for (label, target) in [(Label::Pos, 5.0), (Label::Neg, -5.0)] {
            let idx = ds.class_indices(label);
            let m = idx.iter().map(|&i| ds.row(i)[0]).sum::<f64>() / idx.len() as f64;
            assert!((m - target).abs() < 0.1, "{m}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = GaussianMixtureProblem::isotropic(0.3, vec![0.0, 1.0], vec![1.0, 0.0], 2.0).unwrap();
        assert_eq!(p.sample(50, Seed(1)).unwrap(), p.sample(50, Seed(1)).unwrap());
        assert_ne!(p.sample(50, Seed(1)).unwrap(), p.sample(50, Seed(2)).unwrap());
    }

    #[test]
    fn bayes_tie_goes_positive() {
        let p = GaussianMixtureProblem::symmetric_1d();
        assert_eq!(bayes_classify(&p, &[0.0]).unwrap(), Label::Pos);
        assert_eq!(bayes_classify(&p, &[-3.0]).unwrap(), Label::Neg);
        assert!(bayes_classify(&p, &[0.0, 1.0]).is_err());
        assert_eq!(p.bayes_classifier().score(&[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn dominant_prior_wins_near_both_means() {
        let p = GaussianMixtureProblem::isotropic(0.999, vec![1.0], vec![-1.0], 1.0).unwrap();
        for x in [1.0, 0.5, -0.5, -1.0] {
            // Independent check: compare the weighted densities directly.
            let g = |m: f64| (-(x - m) * (x - m) / 2.0).exp();
            let expected = if 0.001 * g(-1.0) > 0.999 * g(1.0) { Label::Neg } else { Label::Pos };
            assert_eq!(expected, Label::Pos);
            assert_eq!(bayes_classify(&p, &[x]).unwrap(), expected);
        }
    }

    #[test]
    fn bayes_rule_ignores_common_density_scaling() {
        // Multiplying both joint densities by e^k must not change the argmax.
        let p = GaussianMixtureProblem::isotropic(0.3, vec![1.0, 0.0], vec![-1.0, 0.5], 1.5).unwrap();
        for i in 0..50 {
            let x = [i as f64 * 0.17 - 4.0, (i * 7 % 11) as f64 * 0.3 - 1.5];
            let lp = p.log_joint(&x, Label::Pos).unwrap();
            let ln = p.log_joint(&x, Label::Neg).unwrap();
            for k in [-5.0, 0.0, 3.0] {
                let scaled = if (ln + k) > (lp + k) { Label::Neg } else { Label::Pos };
                assert_eq!(scaled, bayes_classify(&p, &x).unwrap());
            }
        }
    }

    #[test]
    fn closed_form_symmetric_problem() {
        // Phi(-1) = 0.158655253931457...
        let e = bayes_error(&GaussianMixtureProblem::symmetric_1d(), BayesErrorMethod::ClosedForm1d).unwrap();
        assert!((e - 0.158_655_253_931_457_05).abs() < 1e-12, "{e}");
    }

    #[test]
    fn closed_form_degenerate_cases() {
        let same = GaussianMixtureProblem::isotropic(0.5, vec![0.0], vec![0.0], 1.0).unwrap();
        assert!((bayes_error(&same, BayesErrorMethod::ClosedForm1d).unwrap() - 0.5).abs() < 1e-15);
        let one = GaussianMixtureProblem::isotropic(1.0, vec![0.0], vec![1.0], 1.0).unwrap();
        assert_eq!(bayes_error(&one, BayesErrorMethod::ClosedForm1d).unwrap(), 0.0);
        let two_d = GaussianMixtureProblem::isotropic(0.5, vec![0.0; 2], vec![1.0; 2], 1.0).unwrap();
        assert!(matches!(
            bayes_error(&two_d, BayesErrorMethod::ClosedForm1d),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn closed_form_matches_monte_carlo_on_unequal_variances() {
        let problems = [
            GaussianMixtureProblem::new(0.3, vec![1.0], vec![-0.5], vec![0.25], vec![4.0]).unwrap(),
            GaussianMixtureProblem::new(0.7, vec![0.0], vec![0.2], vec![1.0], vec![0.1]).unwrap(),
            GaussianMixtureProblem::new(0.5, vec![2.0], vec![-1.0], vec![1.0], vec![1.0]).unwrap(),
        ];
        let n = 400_000;
        for (i, p) in problems.iter().enumerate() {
            let cf = bayes_error(p, BayesErrorMethod::ClosedForm1d).unwrap();
            let mc = bayes_error(p, BayesErrorMethod::MonteCarlo { n_mc: n, seed: Seed(i as u64) }).unwrap();
            assert!((cf - mc).abs() <= mc_tol(cf, n), "problem {i}: {cf} vs {mc}");
        }
    }

    #[test]
    fn true_error_reference_classifiers() {
        let p = GaussianMixtureProblem::symmetric_1d();
        let eps = bayes_error(&p, BayesErrorMethod::ClosedForm1d).unwrap();
        let n = 200_000;
        let bayes = p.bayes_classifier();
        let e = true_error(&bayes, &p, n, Seed(1)).unwrap();
        assert!((e - eps).abs() <= mc_tol(eps, n), "{e}");
        let c = Constant { label: Label::Pos, dim: 1 };
        let e = true_error(&c, &p, n, Seed(2)).unwrap();
        assert!((e - 0.5).abs() <= mc_tol(0.5, n), "{e}");
        let flipped = Negated(bayes);
        let e = true_error(&flipped, &p, n, Seed(3)).unwrap();
        assert!((e - (1.0 - eps)).abs() <= mc_tol(eps, n), "{e}");
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let p = GaussianMixtureProblem::isotropic(0.4, vec![0.3, 0.0], vec![0.0, 0.3], 1.0).unwrap();
        let a = bayes_error(&p, BayesErrorMethod::MonteCarlo { n_mc: 70_000, seed: Seed(8) }).unwrap();
        let b = bayes_error(&p, BayesErrorMethod::MonteCarlo { n_mc: 70_000, seed: Seed(8) }).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn problem_json_round_trip_and_flat_covariance() {
        let p = GaussianMixtureProblem::new(0.25, vec![1.0, 2.0], vec![0.0, 0.0], vec![2.0, 0.5, 0.5, 1.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: GaussianMixtureProblem = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
        let flat = r#"{"prior_pos":0.25,"mean_pos":[1,2],"mean_neg":[0,0],"cov_pos":[2,0.5,0.5,1],"cov_neg":[1,0,0,1]}"#;
        let back: GaussianMixtureProblem = serde_json::from_str(flat).unwrap();
        assert_eq!(p, back);
        let bad = r#"{"prior_pos":2,"mean_pos":[1],"mean_neg":[0],"cov_pos":[1],"cov_neg":[1]}"#;
        assert!(serde_json::from_str::<GaussianMixtureProblem>(bad).is_err());
    }

    #[test]
    fn noise_dims_keep_bayes_error() {
        let p = GaussianMixtureProblem::symmetric_1d().with_noise_dims(3);
        assert_eq!(p.dim(), 4);
        let e = bayes_error(&p, BayesErrorMethod::MonteCarlo { n_mc: 200_000, seed: Seed(4) }).unwrap();
        assert!((e - 0.158_655).abs() <= mc_tol(0.1587, 200_000));
    }
}
