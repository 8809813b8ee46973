//! Labeled datasets, CSV ingestion and the resampling primitives shared by
//! every estimator: holdout splits, k-fold assignments and bootstrap draws.
//!
//! All randomized operations take a [`Seed`]; equal seeds and inputs give
//! bitwise-equal outputs. Datasets are immutable once constructed.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Class label in `{-1, +1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// Sign rule used everywhere: scores `>= 0` (including exactly zero) map to `+1`.
    #[inline]
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    #[inline]
    pub fn value(self) -> i8 {
        match self {
            Label::Neg => -1,
            Label::Pos => 1,
        }
    }

    #[inline]
    pub fn sign(self) -> f64 {
        self.value() as f64
    }

    #[inline]
    pub fn flip(self) -> Label {
        match self {
            Label::Neg => Label::Pos,
            Label::Pos => Label::Neg,
        }
    }

    pub fn from_value(v: i64) -> Result<Label> {
        match v {
            -1 => Ok(Label::Neg),
            1 => Ok(Label::Pos),
            other => Err(Error::Domain(format!("label {other} is not -1 or +1"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        match s.trim() {
            "-1" | "\u{2212}1" => Ok(Label::Neg),
            "1" | "+1" => Ok(Label::Pos),
            other => Err(Error::Domain(format!("label {other:?} is not -1 or +1"))),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Label, D::Error> {
        let v = i64::deserialize(d)?;
        Label::from_value(v).map_err(serde::de::Error::custom)
    }
}

/// Seed for every randomized operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent sub-seed for the `index`-th unit of work (chunk, fold,
    /// repeat, retry). Depends only on `(self, index)`.
    pub fn derive(self, index: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(index)))
    }

    /// `seed + k`, used where rounds are numbered consecutively.
    pub fn offset(self, k: u64) -> Seed {
        Seed(self.0.wrapping_add(k))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Seed {
        Seed(v)
    }
}

/// `N` feature vectors in `R^d` with labels in `{-1, +1}`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    labels: Vec<Label>,
    dim: usize,
    feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<LabeledDataset> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Argument(format!(
                "row {i} has {} features, expected {dim}",
                r.len()
            )));
        }
        let features = rows.into_iter().flatten().collect();
        LabeledDataset::from_flat(features, dim, labels)
    }

    pub fn from_flat(features: Vec<f64>, dim: usize, labels: Vec<Label>) -> Result<LabeledDataset> {
        if labels.is_empty() {
            return Err(Error::Domain("empty dataset".into()));
        }
        if dim == 0 {
            return Err(Error::Argument("dataset needs at least one feature".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::Argument(format!(
                "{} feature values do not form {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite feature value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            dim,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<LabeledDataset> {
        if names.len() != self.dim {
            return Err(Error::Argument(format!(
                "{} feature names for dimension {}",
                names.len(),
                self.dim
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    #[inline]
    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn features_flat(&self) -> &[f64] {
        &self.features
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn n_pos(&self) -> usize {
        self.count(Label::Pos)
    }

    pub fn n_neg(&self) -> usize {
        self.count(Label::Neg)
    }

    pub fn has_both_classes(&self) -> bool {
        let first = self.labels[0];
        self.labels.iter().any(|&l| l != first)
    }

    pub fn class_indices(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    /// Rows at `indices`, in the given order; repeats allowed.
    pub fn subset(&self, indices: &[usize]) -> Result<LabeledDataset> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Argument(format!(
                "row index {bad} out of range for {} rows",
                self.len()
            )));
        }
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let mut out = LabeledDataset::from_flat(features, self.dim, labels)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    pub fn select_features(&self, columns: &[usize]) -> Result<LabeledDataset> {
        if columns.is_empty() {
            return Err(Error::Argument("feature selection is empty".into()));
        }
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.dim) {
            return Err(Error::Argument(format!(
                "feature index {bad} out of range for dimension {}",
                self.dim
            )));
        }
        let mut features = Vec::with_capacity(columns.len() * self.len());
        for r in self.rows() {
            features.extend(columns.iter().map(|&j| r[j]));
        }
        let mut out = LabeledDataset::from_flat(features, columns.len(), self.labels.clone())?;
        if let Some(names) = &self.feature_names {
            out.feature_names = Some(columns.iter().map(|&j| names[j].clone()).collect());
        }
        Ok(out)
    }

    /// Replaces every row by `f(row)`; labels are kept.
    pub fn map_rows<F>(&self, out_dim: usize, mut f: F) -> Result<LabeledDataset>
    where
        F: FnMut(&[f64], &mut Vec<f64>),
    {
        let mut features = Vec::with_capacity(out_dim * self.len());
        for r in self.rows() {
            let before = features.len();
            f(r, &mut features);
            if features.len() - before != out_dim {
                return Err(Error::Argument(format!(
                    "row map produced {} values, expected {out_dim}",
                    features.len() - before
                )));
            }
        }
        LabeledDataset::from_flat(features, out_dim, self.labels.clone())
    }

    /// Appends `extra` columns given row-major.
    pub fn append_columns(&self, extra: &[f64], count: usize) -> Result<LabeledDataset> {
        if extra.len() != count * self.len() {
            return Err(Error::Argument("appended block has the wrong size".into()));
        }
        self.map_rows(self.dim + count, |r, out| {
            let i = out.len() / (self.dim + count);
            out.extend_from_slice(r);
            out.extend_from_slice(&extra[i * count..(i + 1) * count]);
        })
    }

    pub fn with_labels(&self, labels: Vec<Label>) -> Result<LabeledDataset> {
        let mut out = LabeledDataset::from_flat(self.features.clone(), self.dim, labels)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }
}

/// Reads a dataset from a headed CSV file with one column named `label`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file)
}

pub fn read_csv<R: Read>(reader: R) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .quoting(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    let label_cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| *h == "label")
        .map(|(i, _)| i)
        .collect();
    let label_col = match label_cols.as_slice() {
        [c] => *c,
        [] => return Err(Error::Format("missing \"label\" column".into())),
        _ => return Err(Error::Format("more than one \"label\" column".into())),
    };
    if header.len() < 2 {
        return Err(Error::Format("no feature columns".into()));
    }
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let dim = names.len();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        // Row numbers are 1-based file lines, so the first data row is line 2.
        let line = r + 2;
        let record = record.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        if record.len() != header.len() {
            return Err(Error::Format(format!(
                "line {line}: {} fields, header has {}",
                record.len(),
                header.len()
            )));
        }
        for (c, cell) in record.iter().enumerate() {
            if c == label_col {
                let label = cell
                    .parse::<Label>()
                    .map_err(|e| Error::Domain(format!("line {line}: {e}")))?;
                labels.push(label);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row: line,
                    column: c + 1,
                    message: format!("{cell:?} is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Domain(format!(
                        "line {line}, column {}: non-finite value",
                        c + 1
                    )));
                }
                features.push(v);
            }
        }
    }
    LabeledDataset::from_flat(features, dim, labels)?.with_feature_names(names)
}

pub fn write_csv<W: Write>(ds: &LabeledDataset, mut out: W) -> Result<()> {
    let names: Vec<String> = match ds.feature_names() {
        Some(n) => n.to_vec(),
        None => (1..=ds.dim()).map(|j| format!("f{j}")).collect(),
    };
    writeln!(out, "{},label", names.join(","))?;
    for (i, r) in ds.rows().enumerate() {
        for v in r {
            write!(out, "{v},")?;
        }
        writeln!(out, "{}", ds.label(i))?;
    }
    Ok(())
}

pub fn save_csv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(ds, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Sorted row indices of a holdout partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoldoutIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class test counts by largest remainder, so every class count is
/// within one of `n_c * fraction` and the counts add up to `total`.
fn stratified_counts(class_sizes: &[usize], fraction: f64, total: usize) -> Vec<usize> {
    let exact: Vec<f64> = class_sizes.iter().map(|&n| n as f64 * fraction).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut missing = total.saturating_sub(counts.iter().sum());
    for &c in order.iter().cycle().take(order.len() * 2) {
        if missing == 0 {
            break;
        }
        if counts[c] < class_sizes[c] {
            counts[c] += 1;
            missing -= 1;
        }
    }
    counts
}

pub fn holdout_indices(
    ds: &LabeledDataset,
    test_fraction: f64,
    stratified: bool,
    seed: Seed,
) -> Result<HoldoutIndices> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "test fraction {test_fraction} is not in (0, 1)"
        )));
    }
    let n = ds.len();
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::Argument(format!(
            "test fraction {test_fraction} leaves an empty side for N = {n}"
        )));
    }
    let mut rng = seed.rng();
    let mut test = Vec::with_capacity(n_test);
    if stratified {
        let classes = [ds.class_indices(Label::Neg), ds.class_indices(Label::Pos)];
        let sizes = [classes[0].len(), classes[1].len()];
        let counts = stratified_counts(&sizes, test_fraction, n_test);
        for (mut idx, take) in classes.into_iter().zip(counts) {
            idx.shuffle(&mut rng);
            test.extend_from_slice(&idx[..take]);
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..n_test]);
    }
    test.sort_unstable();
    let mut in_test = vec![false; n];
    for &i in &test {
        in_test[i] = true;
    }
    let train = (0..n).filter(|&i| !in_test[i]).collect();
    Ok(HoldoutIndices { train, test })
}

pub fn split_holdout(
    ds: &LabeledDataset,
    test_fraction: f64,
    stratified: bool,
    seed: Seed,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let h = holdout_indices(ds, test_fraction, stratified, seed)?;
    Ok((ds.subset(&h.train)?, ds.subset(&h.test)?))
}

/// Assignment of each row to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    fold_index: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_index(&self) -> &[usize] {
        &self.fold_index
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_index.len())
            .filter(|&i| self.fold_index[i] == fold)
            .collect()
    }

    /// Complement of the fold in increasing index order.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_index.len())
            .filter(|&i| self.fold_index[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_index {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles by seed, then deals rows round-robin into `k` folds. Stratified
/// mode deals the shuffled negatives first and then the shuffled positives,
/// which keeps both the overall and the per-class fold sizes balanced.
pub fn make_folds(
    ds: &LabeledDataset,
    k: usize,
    stratified: bool,
    seed: Seed,
) -> Result<FoldAssignment> {
    let n = ds.len();
    if k < 2 || k > n {
        return Err(Error::Argument(format!(
            "number of folds {k} must satisfy 2 <= k <= N = {n}"
        )));
    }
    let mut rng = seed.rng();
    let order: Vec<usize> = if stratified {
        let mut neg = ds.class_indices(Label::Neg);
        let mut pos = ds.class_indices(Label::Pos);
        neg.shuffle(&mut rng);
        pos.shuffle(&mut rng);
        neg.into_iter().chain(pos).collect()
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        idx
    };
    let mut fold_index = vec![0; n];
    for (j, &i) in order.iter().enumerate() {
        fold_index[i] = j % k;
    }
    Ok(FoldAssignment { fold_index, k })
}

/// A with-replacement draw of `N` row indices and the rows it missed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BootstrapSample {
    pub indices: Vec<usize>,
    pub out_of_bag: Vec<usize>,
}

impl BootstrapSample {
    pub fn draw(n: usize, seed: Seed) -> Result<BootstrapSample> {
        if n == 0 {
            return Err(Error::Argument("bootstrap of an empty dataset".into()));
        }
        let mut rng = seed.rng();
        let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut drawn = vec![false; n];
        for &i in &indices {
            drawn[i] = true;
        }
        let out_of_bag = (0..n).filter(|&i| !drawn[i]).collect();
        Ok(BootstrapSample { indices, out_of_bag })
    }
}

pub fn bootstrap_sample(ds: &LabeledDataset, seed: Seed) -> Result<BootstrapSample> {
    BootstrapSample::draw(ds.len(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(n_neg: usize, n_pos: usize) -> LabeledDataset {
        let n = n_neg + n_pos;
        let rows = (0..n).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let labels = (0..n)
            .map(|i| if i < n_neg { Label::Neg } else { Label::Pos })
            .collect();
        LabeledDataset::new(rows, labels).unwrap()
    }

    #[test]
    fn csv_three_rows() {
        let text = "f1,f2,label\n0.5,1,-1\n2,3,1\n4,-5e-1,-1\n";
        let ds = read_csv(text.as_bytes()).unwrap();
        assert_eq!((ds.len(), ds.dim(), ds.n_pos(), ds.n_neg()), (3, 2, 1, 2));
        assert_eq!(ds.row(2), &[4.0, -0.5]);
        assert_eq!(ds.feature_names().unwrap(), &["f1".to_string(), "f2".to_string()]);
    }

    #[test]
    fn csv_label_column_anywhere_and_plus_one() {
        let ds = read_csv("label,a\n+1,3\n-1,4\n".as_bytes()).unwrap();
        assert_eq!(ds.labels(), &[Label::Pos, Label::Neg]);
        assert_eq!(ds.column(0), vec![3.0, 4.0]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            read_csv("f1,f2\n1,2\n".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_csv("f1,label\n1,0\n".as_bytes()),
            Err(Error::Domain(_))
        ));
        match read_csv("f1,f2,label\n1,2,1\n3,abc,-1\n".as_bytes()) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (3, 2)),
            other => panic!("expected parse error, got {other:?}"),
        }
        match read_csv("f1,label\n".as_bytes()) {
            Err(Error::Domain(m)) => assert!(m.contains("empty dataset")),
            other => panic!("expected empty dataset error, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let ds = toy(3, 4);
        let ds = ds
            .with_labels(ds.labels().to_vec())
            .unwrap()
            .map_rows(2, |r, out| out.extend([r[0] / 3.0, r[1] * 1e-9]))
            .unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.features_flat(), ds.features_flat());
        assert_eq!(back.labels(), ds.labels());
    }

    #[test]
    fn holdout_sizes() {
        let ds = toy(5, 5);
        let (tr, te) = split_holdout(&ds, 0.2, false, Seed(1)).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        let (_, te) = split_holdout(&ds, 0.2, true, Seed(1)).unwrap();
        assert_eq!((te.n_pos(), te.n_neg()), (1, 1));
        assert_eq!(
            holdout_indices(&ds, 0.3, false, Seed(9)).unwrap(),
            holdout_indices(&ds, 0.3, false, Seed(9)).unwrap()
        );
        assert!(split_holdout(&ds, 0.01, false, Seed(0)).is_err());
        assert!(split_holdout(&ds, 0.99, false, Seed(0)).is_err());
        assert!(split_holdout(&ds, 1.0, false, Seed(0)).is_err());
    }

    #[test]
    fn folds_sizes() {
        let ds = toy(4, 6);
        let f = make_folds(&ds, 5, false, Seed(3)).unwrap();
        assert_eq!(f.fold_sizes(), vec![2; 5]);
        let f = make_folds(&ds, 10, false, Seed(3)).unwrap();
        assert_eq!(f.fold_sizes(), vec![1; 10]);
        let mut sizes = make_folds(&ds, 3, true, Seed(3)).unwrap().fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
        assert!(make_folds(&ds, 11, false, Seed(0)).is_err());
        assert!(make_folds(&ds, 1, false, Seed(0)).is_err());
    }

    #[test]
    fn bootstrap_single_row() {
        let b = BootstrapSample::draw(1, Seed(42)).unwrap();
        assert_eq!(b.indices, vec![0]);
        assert!(b.out_of_bag.is_empty());
    }

    #[test]
    fn bootstrap_out_of_bag_fraction_near_inverse_e() {
        // Each row is missed with probability (1 - 1/N)^N -> e^-1.
        let n = 1000;
        let mean: f64 = (0..1000)
            .map(|s| BootstrapSample::draw(n, Seed(s)).unwrap().out_of_bag.len() as f64 / n as f64)
            .sum::<f64>()
            / 1000.0;
        assert!((0.36..=0.38).contains(&mean), "{mean}");
    }

    #[test]
    fn derived_seeds_differ() {
        let s = Seed(7);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(3), Seed(7).derive(3));
        assert_eq!(s.offset(2), Seed(9));
    }

    proptest! {
        #[test]
        fn fold_invariants(n in 2usize..60, k_frac in 0.0f64..1.0, strat in any::<bool>(), seed in any::<u64>(), n_neg_frac in 0.0f64..1.0) {
            let n_neg = ((n as f64) * n_neg_frac) as usize;
            let ds = toy(n_neg, n - n_neg);
            let k = 2 + ((n - 2) as f64 * k_frac) as usize;
            let before = ds.clone();
            let f = make_folds(&ds, k, strat, Seed(seed)).unwrap();
            prop_assert_eq!(&ds, &before);
            let sizes = f.fold_sizes();
            prop_assert!(sizes.iter().all(|&s| s > 0));
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut all: Vec<usize> = (0..k).flat_map(|j| f.test_indices(j)).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert_eq!(f, make_folds(&ds, k, strat, Seed(seed)).unwrap());
        }

        #[test]
        fn stratified_holdout_counts(n_neg in 1usize..40, n_pos in 1usize..40, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let ds = toy(n_neg, n_pos);
            if let Ok(h) = holdout_indices(&ds, frac, true, Seed(seed)) {
                let n = ds.len();
                prop_assert_eq!(h.test.len(), (n as f64 * frac).round() as usize);
                prop_assert_eq!(h.test.len() + h.train.len(), n);
                let test_pos = h.test.iter().filter(|&&i| ds.label(i) == Label::Pos).count();
                let test_neg = h.test.len() - test_pos;
                prop_assert!((test_pos as f64 - n_pos as f64 * frac).abs() < 1.0);
                prop_assert!((test_neg as f64 - n_neg as f64 * frac).abs() < 1.0);
                let mut all = h.train.clone();
                all.extend(&h.test);
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
        }

        #[test]
        fn bootstrap_invariants(n in 1usize..200, seed in any::<u64>()) {
            let b = BootstrapSample::draw(n, Seed(seed)).unwrap();
            prop_assert_eq!(b.indices.len(), n);
            let mut seen = vec![false; n];
            for &i in &b.indices { seen[i] = true; }
            for &i in &b.out_of_bag { prop_assert!(!seen[i]); seen[i] = true; }
            prop_assert!(seen.iter().all(|&s| s));
            prop_assert!(b.out_of_bag.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(b, BootstrapSample::draw(n, Seed(seed)).unwrap());
        }
    }
}
