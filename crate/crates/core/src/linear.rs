//! Regularized empirical risk minimization over linear hypotheses.
//!
//! [`train_linear`] minimizes `sum_i l(w.x_i + w0, y_i) + lambda |w|^2` for any
//! convex [`Loss`] by full-batch gradient descent. The bias is never
//! penalized. Features are standardized internally and the result is mapped
//! back to the original coordinates; the penalty is expressed in original
//! coordinates so the minimizer does not depend on the scaling.
//!
//! [`train_least_squares`] solves the squared-loss problem in closed form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classifier::DecisionFunction;
use crate::data::{LabeledDataset, Seed};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, sigmoid, spd_factor};
use crate::losses::Loss;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    /// Column means and population standard deviations; constant columns get
    /// scale 1.
    pub fn fit(ds: &LabeledDataset) -> Standardization {
        let n = ds.len() as f64;
        let d = ds.dim();
        let mut mean = vec![0.0; d];
        for r in ds.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in ds.rows() {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let s = (s / n).sqrt();
                if s > 0.0 && s.is_finite() { s } else { 1.0 }
            })
            .collect();
        Standardization { mean, scale }
    }
}

/// Affine decision function `weight . x + bias` in original coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearHypothesis {
    pub weight: Vec<f64>,
    pub bias: f64,
    /// Scaling used during training, kept for inspection; scores never use it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardization: Option<Standardization>,
}

impl LinearHypothesis {
    pub fn zero(dim: usize) -> LinearHypothesis {
        LinearHypothesis { weight: vec![0.0; dim], bias: 0.0, standardization: None }
    }

    pub fn score_of(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.weight.len(), x.len())?;
        Ok(dot(&self.weight, x) + self.bias)
    }

    pub fn weight_norm(&self) -> f64 {
        crate::linalg::norm(&self.weight)
    }
}

impl DecisionFunction for LinearHypothesis {
    fn dim(&self) -> usize {
        self.weight.len()
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        self.score_of(x)
    }
}

/// Posterior probability of the positive class under the logistic model.
pub fn posterior_pos(h: &LinearHypothesis, x: &[f64]) -> Result<f64> {
    Ok(sigmoid(h.score_of(x)?))
}

pub fn posterior_neg(h: &LinearHypothesis, x: &[f64]) -> Result<f64> {
    Ok(sigmoid(-h.score_of(x)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub loss: Loss,
    pub lambda: f64,
    pub max_iters: usize,
    /// Largest step tried by the line search, in standardized coordinates.
    pub step_size: f64,
    /// Stop once the gradient norm of the objective divided by N falls below
    /// this.
    pub tolerance: f64,
    /// Unused by the convex solver (it starts at zero); kept so every trainer
    /// takes a seed.
    pub seed: Seed,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            loss: Loss::Logistic,
            lambda: 0.0,
            max_iters: 5000,
            step_size: 100.0,
            tolerance: 1e-9,
            seed: Seed(0),
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.loss == Loss::ZeroOne {
            return Err(Error::Unsupported(
                "minimizing the empirical 0-1 loss is computationally intractable; use a convex surrogate".into(),
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda {} must be >= 0", self.lambda)));
        }
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be >= 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::Argument("step_size must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Argument("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    /// The line search found no decrease; typical at kinks of the hinge loss.
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub termination: Termination,
    pub iterations: usize,
    /// Final value of `sum_i l + lambda |w|^2`.
    pub objective: f64,
    pub gradient_norm: f64,
    /// Objective after each accepted step, starting with the initial point.
    pub objective_trace: Vec<f64>,
}

/// `sum_i l(h(x_i), y_i) + lambda |w|^2`.
pub fn erm_objective(ds: &LabeledDataset, loss: Loss, lambda: f64, h: &LinearHypothesis) -> Result<f64> {
    check_dim(h.weight.len(), ds.dim())?;
    let risk: f64 = ds
        .rows()
        .zip(ds.labels())
        .map(|(x, &y)| loss.value(dot(&h.weight, x) + h.bias, y))
        .sum();
    Ok(risk + lambda * dot(&h.weight, &h.weight))
}

/// Gradient of [`erm_objective`] with respect to `(weight, bias)`.
pub fn erm_gradient(ds: &LabeledDataset, loss: Loss, lambda: f64, h: &LinearHypothesis) -> Result<(Vec<f64>, f64)> {
    check_dim(h.weight.len(), ds.dim())?;
    let mut gw: Vec<f64> = h.weight.iter().map(|w| 2.0 * lambda * w).collect();
    let mut gb = 0.0;
    for (x, &y) in ds.rows().zip(ds.labels()) {
        let g = loss.grad(dot(&h.weight, x) + h.bias, y)?;
        gb += g;
        for (a, v) in gw.iter_mut().zip(x) {
            *a += g * v;
        }
    }
    Ok((gw, gb))
}

/// The scaled objective `(sum_i l + lambda sum_j v_j^2 / s_j^2) / N` over the
/// standardized parameters `params = (v_1..v_d, v0)`.
struct Problem<'a> {
    z: Vec<f64>,
    ds: &'a LabeledDataset,
    loss: Loss,
    lambda: f64,
    inv_sq_scale: Vec<f64>,
}

impl Problem<'_> {
    fn eval(&self, params: &[f64], grad: Option<&mut [f64]>) -> Result<f64> {
        let d = self.ds.dim();
        let n = self.ds.len() as f64;
        let (v, v0) = (&params[..d], params[d]);
        let mut total = 0.0;
        let mut g = grad;
        if let Some(g) = g.as_deref_mut() {
            g.iter_mut().for_each(|a| *a = 0.0);
        }
        for (i, &y) in self.ds.labels().iter().enumerate() {
            let zi = &self.z[i * d..(i + 1) * d];
            let s = dot(v, zi) + v0;
            total += self.loss.value(s, y);
            if let Some(g) = g.as_deref_mut() {
                let dl = self.loss.grad(s, y)?;
                for (a, zv) in g[..d].iter_mut().zip(zi) {
                    *a += dl * zv;
                }
                g[d] += dl;
            }
        }
        for j in 0..d {
            total += self.lambda * v[j] * v[j] * self.inv_sq_scale[j];
        }
        if let Some(g) = g {
            for j in 0..d {
                g[j] += 2.0 * self.lambda * v[j] * self.inv_sq_scale[j];
            }
            g.iter_mut().for_each(|a| *a /= n);
        }
        Ok(total / n)
    }
}

/// Full-batch gradient descent with Barzilai-Borwein trial steps capped at
/// `step_size` and an Armijo backtracking line search, started at zero.
pub fn train_linear(ds: &LabeledDataset, config: &TrainConfig) -> Result<(LinearHypothesis, TrainReport)> {
    config.validate()?;
    let d = ds.dim();
    let n = ds.len() as f64;
    let st = Standardization::fit(ds);
    let mut z = Vec::with_capacity(ds.len() * d);
    for r in ds.rows() {
        z.extend(r.iter().zip(&st.mean).zip(&st.scale).map(|((x, m), s)| (x - m) / s));
    }
    let problem = Problem {
        z,
        ds,
        loss: config.loss,
        lambda: config.lambda,
        inv_sq_scale: st.scale.iter().map(|s| 1.0 / (s * s)).collect(),
    };

    let mut x = vec![0.0; d + 1];
    let mut g = vec![0.0; d + 1];
    let mut f = problem.eval(&x, Some(&mut g))?;
    if !f.is_finite() {
        return Err(Error::Optimization("objective is not finite at the starting point".into()));
    }
    let mut trace = vec![f * n];
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut increases = 0usize;
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;
    let mut trial_x = vec![0.0; d + 1];
    let mut trial_g = vec![0.0; d + 1];

    while iterations < config.max_iters {
        let gnorm2 = dot(&g, &g);
        if gnorm2.sqrt() <= config.tolerance {
            termination = Termination::Converged;
            break;
        }
        let mut t = match &prev {
            Some((px, pg)) => {
                let (mut ss, mut sy) = (0.0, 0.0);
                for k in 0..=d {
                    let s = x[k] - px[k];
                    ss += s * s;
                    sy += s * (g[k] - pg[k]);
                }
                if sy > 0.0 { (ss / sy).min(config.step_size) } else { config.step_size }
            }
            None => config.step_size,
        };
        let accepted = loop {
            for k in 0..=d {
                trial_x[k] = x[k] - t * g[k];
            }
            let ft = problem.eval(&trial_x, Some(&mut trial_g))?;
            if ft.is_finite() && ft <= f - 1e-4 * t * gnorm2 {
                break Some(ft);
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        let Some(ft) = accepted else {
            termination = Termination::Stalled;
            break;
        };
        increases = if ft > f { increases + 1 } else { 0 };
        if increases >= 10 {
            return Err(Error::Optimization("objective increased on 10 consecutive steps".into()));
        }
        prev = Some((x.clone(), g.clone()));
        std::mem::swap(&mut x, &mut trial_x);
        std::mem::swap(&mut g, &mut trial_g);
        f = ft;
        trace.push(f * n);
        iterations += 1;
    }
    if termination == Termination::MaxIters && dot(&g, &g).sqrt() <= config.tolerance {
        termination = Termination::Converged;
    }

    let weight: Vec<f64> = x[..d].iter().zip(&st.scale).map(|(v, s)| v / s).collect();
    let bias = x[d] - dot(&weight, &st.mean);
    if weight.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::Optimization("coefficients diverged".into()));
    }
    let report = TrainReport {
        termination,
        iterations,
        objective: f * n,
        gradient_norm: dot(&g, &g).sqrt(),
        objective_trace: trace,
    };
    Ok((LinearHypothesis { weight, bias, standardization: Some(st) }, report))
}

/// Logistic regression: maximizes the conditional log-likelihood, which is
/// the same as minimizing the logistic empirical risk.
pub fn train_logistic(ds: &LabeledDataset, lambda: f64) -> Result<LinearHypothesis> {
    let config = TrainConfig { loss: Loss::Logistic, lambda, ..TrainConfig::default() };
    Ok(train_linear(ds, &config)?.0)
}

/// Exact minimizer of `sum_i (w.x_i + w0 - y_i)^2 + lambda |w|^2`.
pub fn train_least_squares(ds: &LabeledDataset, lambda: f64) -> Result<LinearHypothesis> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(format!("lambda {lambda} must be >= 0")));
    }
    let d = ds.dim();
    let n = ds.len() as f64;
    let y: Vec<f64> = ds.labels().iter().map(|l| l.sign()).collect();
    let y_mean = y.iter().sum::<f64>() / n;
    let mut x_mean = vec![0.0; d];
    for r in ds.rows() {
        for (m, v) in x_mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut a = DMatrix::<f64>::zeros(d, d);
    let mut b = DVector::<f64>::zeros(d);
    for (r, yi) in ds.rows().zip(&y) {
        let c = DVector::from_iterator(d, r.iter().zip(&x_mean).map(|(v, m)| v - m));
        a.ger(1.0, &c, &c, 1.0);
        b.axpy(yi - y_mean, &c, 1.0);
    }
    for j in 0..d {
        a[(j, j)] += lambda;
    }
    let weight = spd_factor(&a, "use lambda > 0")?.solve(&b).as_slice().to_vec();
    let bias = y_mean - dot(&weight, &x_mean);
    Ok(LinearHypothesis { weight, bias, standardization: None })
}
