//! Small numeric helpers on slices plus the few dense solves the learners need.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `e^s / (1 + e^s)` without overflow.
#[inline]
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^s)` without overflow.
#[inline]
pub fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (denominator `n - 1`); zero for a single value.
pub fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Solves `A x = b` for symmetric positive-definite `A`. Fails if the
/// Cholesky factorization breaks down or a pivot is negligible relative to
/// the largest diagonal entry.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>, hint: &str) -> Result<DVector<f64>> {
    let chol = spd_factor(a, hint)?;
    Ok(chol.solve(b))
}

pub fn spd_factor(a: &DMatrix<f64>, hint: &str) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let scale = a.diagonal().iter().cloned().fold(0.0, f64::max);
    let singular = || Error::Numeric(format!("matrix is singular or not positive definite; {hint}"));
    if scale <= 0.0 || !scale.is_finite() {
        return Err(singular());
    }
    let chol = nalgebra::Cholesky::new(a.clone()).ok_or_else(singular)?;
    let min_pivot = chol.l_dirty().diagonal().iter().cloned().fold(f64::INFINITY, f64::min);
    if min_pivot * min_pivot <= scale * 1e-13 {
        return Err(singular());
    }
    Ok(chol)
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
