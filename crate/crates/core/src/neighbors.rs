//! k-nearest-neighbor classification under the Euclidean distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::DecisionFunction;
use crate::data::{Label, LabeledDataset};
use crate::error::{check_dim, Error, Result};
use crate::linalg::sq_dist;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnClassifier {
    pub k: usize,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

pub fn fit_knn(ds: &LabeledDataset, k: usize) -> Result<KnnClassifier> {
    if k % 2 == 0 {
        return Err(Error::Argument(format!("k = {k}: ties in two-class voting; use odd k")));
    }
    if k > ds.len() {
        return Err(Error::Argument(format!("k = {k} exceeds the {} training points", ds.len())));
    }
    Ok(KnnClassifier {
        k,
        points: ds.rows().map(|r| r.to_vec()).collect(),
        labels: ds.labels().to_vec(),
    })
}

impl KnnClassifier {
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Indices of the `k` nearest stored points ordered by (distance, index).
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<usize>> {
        check_dim(self.dim(), x.len())?;
        let mut d: Vec<(f64, usize)> = self.points.iter().map(|p| sq_dist(p, x)).zip(0..).collect();
        let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by_key);
            d.truncate(self.k);
        }
        d.sort_unstable_by(by_key);
        Ok(d.into_iter().map(|(_, i)| i).collect())
    }

    /// Positive votes minus negative votes among the `k` nearest points.
    pub fn vote(&self, x: &[f64]) -> Result<i64> {
        Ok(self.neighbors(x)?.iter().map(|&i| self.labels[i].value() as i64).sum())
    }
}

pub fn knn_classify(model: &KnnClassifier, x: &[f64]) -> Result<Label> {
    Ok(Label::from_score(model.vote(x)? as f64))
}

/// Classifies every row of `queries`, in parallel; same result as the
/// sequential loop.
pub fn knn_classify_batch(model: &KnnClassifier, queries: &LabeledDataset) -> Result<Vec<Label>> {
    check_dim(model.dim(), queries.dim())?;
    (0..queries.len())
        .into_par_iter()
        .map(|i| knn_classify(model, queries.row(i)))
        .collect()
}

impl DecisionFunction for KnnClassifier {
    fn dim(&self) -> usize {
        KnnClassifier::dim(self)
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.vote(x)? as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Seed;
    use crate::oracle::GaussianMixtureProblem;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    fn ds_1d(points: &[(f64, i64)]) -> LabeledDataset {
        LabeledDataset::new(
            points.iter().map(|p| vec![p.0]).collect(),
            points.iter().map(|p| Label::from_value(p.1).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn parity_and_range() {
        let ds = ds_1d(&[(0.0, -1), (1.0, 1), (2.0, 1), (3.0, 1), (4.0, -1)]);
        match fit_knn(&ds, 4) {
            Err(Error::Argument(m)) => assert!(m.contains("use odd k")),
            other => panic!("{other:?}"),
        }
        assert!(fit_knn(&ds, 7).is_err());
        assert!(fit_knn(&ds, 5).is_ok());
    }

    #[test]
    fn reference_examples() {
        let m = fit_knn(&ds_1d(&[(0.0, -1), (1.0, 1)]), 1).unwrap();
        assert_eq!(knn_classify(&m, &[0.2]).unwrap(), Label::Neg);
        assert_eq!(knn_classify(&m, &[0.5]).unwrap(), Label::Neg);
        let m = fit_knn(&ds_1d(&[(1.0, 1), (0.0, -1)]), 1).unwrap();
        assert_eq!(knn_classify(&m, &[0.5]).unwrap(), Label::Pos);
        let m = fit_knn(&ds_1d(&[(0.0, -1), (1.0, -1), (10.0, 1)]), 3).unwrap();
        for q in [-5.0, 0.0, 10.0, 100.0] {
            assert_eq!(knn_classify(&m, &[q]).unwrap(), Label::Neg);
        }
        let m = fit_knn(&ds_1d(&[(0.0, 1), (1.0, 1), (2.0, -1), (5.0, 1), (9.0, -1)]), 5).unwrap();
        for q in [-1.0, 2.0, 9.0] {
            assert_eq!(knn_classify(&m, &[q]).unwrap(), Label::Pos);
        }
        assert!(knn_classify(&m, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn one_nn_has_zero_apparent_error() {
        let ds = GaussianMixtureProblem::symmetric_1d().sample(200, Seed(1)).unwrap();
        let m = fit_knn(&ds, 1).unwrap();
        let pred = knn_classify_batch(&m, &ds).unwrap();
        assert_eq!(pred, ds.labels());
    }

    #[test]
    fn batch_matches_sequential() {
        let p = GaussianMixtureProblem::isotropic(0.5, vec![1.0, 0.0], vec![0.0, 1.0], 1.0).unwrap();
        let train = p.sample(100, Seed(2)).unwrap();
        let test = p.sample(300, Seed(3)).unwrap();
        let m = fit_knn(&train, 7).unwrap();
        let seq: Vec<Label> = test.rows().map(|x| knn_classify(&m, x).unwrap()).collect();
        assert_eq!(knn_classify_batch(&m, &test).unwrap(), seq);
    }

    #[test]
    fn neighbors_match_full_sort() {
        let ds = ds_1d(&[(0.0, 1), (2.0, -1), (1.0, 1), (1.0, -1), (3.0, 1)]);
        let m = fit_knn(&ds, 3).unwrap();
        // Distances from 1.5: 1.5, 0.5, 0.5, 0.5, 1.5 -> indices 1, 2, 3.
        assert_eq!(m.neighbors(&[1.5]).unwrap(), vec![1, 2, 3]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn permutation_changes_nothing_without_ties(seed in any::<u64>(), k in prop_oneof![Just(1usize), Just(3), Just(5)]) {
            let p = GaussianMixtureProblem::isotropic(0.5, vec![1.0, 0.0], vec![0.0, 1.0], 1.0).unwrap();
            let ds = p.sample(40, Seed(seed)).unwrap();
            let queries = p.sample(20, Seed(seed ^ 1)).unwrap();
            let mut perm: Vec<usize> = (0..40).collect();
            perm.shuffle(&mut Seed(seed).derive(9).rng());
            let shuffled = ds.subset(&perm).unwrap();
            let a = fit_knn(&ds, k).unwrap();
            let b = fit_knn(&shuffled, k).unwrap();
            for x in queries.rows() {
                prop_assert_eq!(knn_classify(&a, x).unwrap(), knn_classify(&b, x).unwrap());
            }
        }
    }
}
