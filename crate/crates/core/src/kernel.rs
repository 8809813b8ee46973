//! Kernels, the kernel ridge machine, and the dissimilarity representation.
//!
//! The kernel machine scores `x` as `sum_i a_i k(x_i, x) + a0`. Training is
//! kernel ridge regression on the labels with an unpenalized bias: with the
//! centering matrix `H = I - 11'/N`, the coefficients solve
//! `(H K H + lambda I) a = H y` and `a0 = mean(y - K a)`. For the linear
//! kernel this reproduces the primal ridge solution exactly.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::DecisionFunction;
use crate::data::{Label, LabeledDataset, Seed};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, spd_factor, sq_dist};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kernel {
    Linear,
    /// `(z.x)^2`
    Poly2Homogeneous,
    /// `(z.x + c^2)^2`
    Poly2Inhomogeneous { c: f64 },
    /// `exp(-|x - z|^2 / sigma^2)`
    Rbf { sigma: f64 },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::Argument(format!("rbf sigma {sigma} must be positive")))
            }
            Kernel::Poly2Inhomogeneous { c } if !c.is_finite() => {
                Err(Error::Argument("poly2 offset c must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Evaluation without the dimension check.
    pub fn eval_unchecked(&self, z: &[f64], x: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(z, x),
            Kernel::Poly2Homogeneous => {
                let s = dot(z, x);
                s * s
            }
            Kernel::Poly2Inhomogeneous { c } => {
                let s = dot(z, x) + c * c;
                s * s
            }
            Kernel::Rbf { sigma } => (-sq_dist(z, x) / (sigma * sigma)).exp(),
        }
    }
}

pub fn kernel_eval(kernel: &Kernel, z: &[f64], x: &[f64]) -> Result<f64> {
    check_dim(z.len(), x.len())?;
    Ok(kernel.eval_unchecked(z, x))
}

/// `K[i][j] = k(x_i, x_j)`. Each unordered pair is evaluated once and mirrored,
/// so the result is exactly symmetric. Rows are computed in parallel.
pub fn gram_matrix(kernel: &Kernel, ds: &LabeledDataset) -> DMatrix<f64> {
    let n = ds.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| kernel.eval_unchecked(ds.row(i), ds.row(j))).collect())
        .collect();
    let mut k = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            k[(i, i + off)] = v;
            k[(i + off, i)] = v;
        }
    }
    k
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelMachine {
    pub kernel: Kernel,
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub support_points: Vec<Vec<f64>>,
}

pub fn train_kernel_machine(ds: &LabeledDataset, kernel: Kernel, lambda: f64) -> Result<KernelMachine> {
    kernel.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(format!("kernel machine lambda {lambda} must be positive")));
    }
    let n = ds.len();
    let k = gram_matrix(&kernel, ds);
    let y = DVector::from_iterator(n, ds.labels().iter().map(|l| l.sign()));
    let y_mean = y.mean();
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).mean()).collect();
    let total_mean = row_means.iter().sum::<f64>() / n as f64;
    let mut a_mat = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a_mat[(i, j)] = k[(i, j)] - row_means[i] - row_means[j] + total_mean;
        }
        a_mat[(i, i)] += lambda;
    }
    let hy = y.add_scalar(-y_mean);
    let a = spd_factor(&a_mat, "kernel system is not positive definite")?.solve(&hy);
    let ka = &k * &a;
    let bias = (0..n).map(|i| y[i] - ka[i]).sum::<f64>() / n as f64;
    Ok(KernelMachine {
        kernel,
        coefficients: a.as_slice().to_vec(),
        bias,
        support_points: ds.rows().map(|r| r.to_vec()).collect(),
    })
}

pub fn km_decision(km: &KernelMachine, x: &[f64]) -> Result<f64> {
    check_dim(km.dim(), x.len())?;
    Ok(km
        .coefficients
        .iter()
        .zip(&km.support_points)
        .map(|(a, p)| a * km.kernel.eval_unchecked(p, x))
        .sum::<f64>()
        + km.bias)
}

impl KernelMachine {
    pub fn dim(&self) -> usize {
        self.support_points.first().map_or(0, |p| p.len())
    }
}

impl DecisionFunction for KernelMachine {
    fn dim(&self) -> usize {
        KernelMachine::dim(self)
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        km_decision(self, x)
    }
}

/// Prototypes compared to objects by Euclidean distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMap {
    pub prototypes: Vec<Vec<f64>>,
}

impl DissimilarityMap {
    pub fn new(prototypes: Vec<Vec<f64>>) -> Result<DissimilarityMap> {
        let Some(first) = prototypes.first() else {
            return Err(Error::Argument("a dissimilarity map needs at least one prototype".into()));
        };
        let d = first.len();
        if prototypes.iter().any(|p| p.len() != d) {
            return Err(Error::Argument("prototypes differ in dimension".into()));
        }
        Ok(DissimilarityMap { prototypes })
    }

    pub fn len(&self) -> usize {
        self.prototypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prototypes.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.prototypes[0].len()
    }

    pub fn embed_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x.len())?;
        Ok(self.prototypes.iter().map(|p| sq_dist(p, x).sqrt()).collect())
    }
}

pub fn dissim_embed(objects: &LabeledDataset, map: &DissimilarityMap) -> Result<LabeledDataset> {
    check_dim(map.input_dim(), objects.dim())?;
    dissim_embed_with(objects, &map.prototypes, |p, o| sq_dist(p, o).sqrt())
}

/// Embedding under an arbitrary measure `delta(prototype, object)`. The
/// measure need not be symmetric or metric, only nonnegative and finite.
pub fn dissim_embed_with<F>(objects: &LabeledDataset, prototypes: &[Vec<f64>], delta: F) -> Result<LabeledDataset>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    if prototypes.is_empty() {
        return Err(Error::Argument("a dissimilarity map needs at least one prototype".into()));
    }
    let mut bad = None;
    let out = objects.map_rows(prototypes.len(), |o, out| {
        for p in prototypes {
            let v = delta(p, o);
            if !(v >= 0.0 && v.is_finite()) && bad.is_none() {
                bad = Some(v);
            }
            out.push(v);
        }
    });
    if let Some(v) = bad {
        return Err(Error::Domain(format!("dissimilarity {v} is negative or not finite")));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrototypeStrategy {
    Random,
    FarthestFirst,
}

/// Indices of the selected prototypes, in selection order for
/// `FarthestFirst` and ascending for `Random`.
pub fn select_prototype_indices(
    ds: &LabeledDataset,
    d_protos: usize,
    strategy: PrototypeStrategy,
    seed: Seed,
) -> Result<Vec<usize>> {
    let n = ds.len();
    if d_protos == 0 || d_protos > n {
        return Err(Error::Argument(format!("number of prototypes {d_protos} must lie in 1..={n}")));
    }
    match strategy {
        PrototypeStrategy::Random => {
            let mut idx = index::sample(&mut seed.rng(), n, d_protos).into_vec();
            idx.sort_unstable();
            Ok(idx)
        }
        PrototypeStrategy::FarthestFirst => {
            let d = ds.dim();
            let mut centre = vec![0.0; d];
            for r in ds.rows() {
                for (c, v) in centre.iter_mut().zip(r) {
                    *c += v / n as f64;
                }
            }
            let neg_to_centre: Vec<f64> = ds.rows().map(|r| -sq_dist(r, &centre)).collect();
            let mut taken = vec![false; n];
            // Highest value among untaken points; ties go to the lower index.
            let pick = |vals: &[f64], taken: &[bool]| {
                (0..n)
                    .filter(|&i| !taken[i])
                    .fold(None, |best: Option<usize>, i| match best {
                        Some(b) if vals[b] >= vals[i] => Some(b),
                        _ => Some(i),
                    })
                    .expect("d_protos <= n")
            };
            let first = pick(&neg_to_centre, &taken);
            taken[first] = true;
            let mut chosen = vec![first];
            let mut min_d: Vec<f64> = ds.rows().map(|r| sq_dist(r, ds.row(first))).collect();
            while chosen.len() < d_protos {
                let next = pick(&min_d, &taken);
                taken[next] = true;
                chosen.push(next);
                for (i, r) in ds.rows().enumerate() {
                    min_d[i] = min_d[i].min(sq_dist(r, ds.row(next)));
                }
            }
            Ok(chosen)
        }
    }
}

pub fn select_prototypes(
    ds: &LabeledDataset,
    d_protos: usize,
    strategy: PrototypeStrategy,
    seed: Seed,
) -> Result<DissimilarityMap> {
    let idx = select_prototype_indices(ds, d_protos, strategy, seed)?;
    DissimilarityMap::new(idx.iter().map(|&i| ds.row(i).to_vec()).collect())
}

/// Reads a precomputed dissimilarity matrix (one row per object, one column
/// per prototype, optional header row) and a companion label file (one label
/// per line, optional `label` header).
pub fn read_dissimilarity_matrix<R1: Read, R2: Read>(matrix: R1, labels: R2) -> Result<LabeledDataset> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut names = None;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(matrix);
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => {
                if let Some((col, x)) = v.iter().enumerate().find(|(_, x)| !(**x >= 0.0 && x.is_finite())) {
                    return Err(Error::Parse {
                        row: line + 1,
                        column: col + 1,
                        message: format!("dissimilarity {x} is negative or not finite"),
                    });
                }
                rows.push(v);
            }
            Err(e) if line == 0 => {
                let _ = e;
                names = Some(rec.iter().map(str::to_string).collect::<Vec<_>>());
            }
            Err(e) => {
                let column = rec.iter().position(|f| f.parse::<f64>().is_err()).unwrap_or(0) + 1;
                return Err(Error::Parse { row: line + 1, column, message: e.to_string() });
            }
        }
    }
    let mut text = String::new();
    let mut labels = labels;
    labels.read_to_string(&mut text)?;
    let mut ys = Vec::new();
    for (line, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || (line == 0 && l.eq_ignore_ascii_case("label")) {
            continue;
        }
        ys.push(l.parse::<Label>().map_err(|_| Error::Parse {
            row: line + 1,
            column: 1,
            message: format!("bad label {l:?}"),
        })?);
    }
    if ys.len() != rows.len() {
        return Err(Error::Format(format!(
            "{} matrix rows but {} labels",
            rows.len(),
            ys.len()
        )));
    }
    let ds = LabeledDataset::new(rows, ys)?;
    match names {
        Some(n) => ds.with_feature_names(n),
        None => Ok(ds),
    }
}

pub fn load_dissimilarity_matrix(matrix: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<LabeledDataset> {
    read_dissimilarity_matrix(std::fs::File::open(matrix)?, std::fs::File::open(labels)?)
}
