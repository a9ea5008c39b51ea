use serde::{Deserialize, Serialize};

use super::dataset::{CriterionDataset, SkillClass};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Distance used by the nearest-neighbour rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl Metric {
    /// A monotone surrogate of the distance restricted to `cols`
    /// (squared for Euclidean, which ranks identically).
    #[inline]
    pub(crate) fn rank_distance<T: Scalar>(self, a: &[T], b: &[T], cols: &[usize]) -> T {
        let diffs = cols.iter().map(|&c| (a[c] - b[c]).abs());
        match self {
            Metric::Euclidean => diffs.map(|d| d * d).sum(),
            Metric::Manhattan => diffs.sum(),
            Metric::Chebyshev => diffs.fold(T::zero(), T::max),
        }
    }

    pub fn distance<T: Scalar>(self, a: &[T], b: &[T]) -> T {
        let cols: Vec<usize> = (0..a.len()).collect();
        let d = self.rank_distance(a, b, &cols);
        match self {
            Metric::Euclidean => d.sqrt(),
            _ => d,
        }
    }
}

/// Index (into `candidates`) of the row nearest to `query`; ties go to the earliest candidate.
pub(crate) fn nearest<T: Scalar>(
    rows: &[Vec<T>],
    candidates: impl IntoIterator<Item = usize>,
    query: &[T],
    cols: &[usize],
    metric: Metric,
) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for j in candidates {
        let d = metric.rank_distance(&rows[j], query, cols);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((j, d));
        }
    }
    best.map(|(j, _)| j)
}

/// 1-NN label of `query` among all samples of `train`.
///
/// Ties are broken in favour of the lowest training index.
pub fn nn_classify<T: Scalar>(train: &CriterionDataset<T>, query: &[T], metric: Metric) -> Result<SkillClass> {
    if query.len() != train.dim() {
        return Err(Error::Shape(format!(
            "query has {} features, training data has {}",
            query.len(),
            train.dim()
        )));
    }
    let cols: Vec<usize> = (0..train.dim()).collect();
    nearest(train.rows(), 0..train.len(), query, &cols, metric)
        .map(|j| train.label(j))
        .ok_or_else(|| Error::Data("empty training set".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::dataset::{Criterion, Task};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use SkillClass::*;

    fn ds(rows: Vec<Vec<f64>>, labels: Vec<SkillClass>) -> CriterionDataset<f64> {
        CriterionDataset::from_matrix(Criterion::TM, Task::Suturing, rows, labels).unwrap()
    }

    #[test]
    fn exact_match_wins() {
        let d = ds(vec![vec![0.0, 0.0], vec![5.0, 5.0], vec![9.0, 1.0]], vec![Beginner, Expert, Intermediate]);
        assert_eq!(nn_classify(&d, &[5.0, 5.0], Metric::Euclidean).unwrap(), Expert);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let d = ds(vec![vec![-1.0], vec![1.0]], vec![Expert, Beginner]);
        for m in [Metric::Euclidean, Metric::Manhattan, Metric::Chebyshev] {
            assert_eq!(nn_classify(&d, &[0.0], m).unwrap(), Expert);
        }
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let d = ds(vec![vec![-1.0], vec![1.0]], vec![Expert, Beginner]);
        assert!(matches!(nn_classify(&d, &[0.0, 1.0], Metric::Euclidean), Err(Error::Shape(_))));
    }

    #[test]
    fn blob_means_classified_like_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let means = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 10.0, 0.0]];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, mean) in means.iter().enumerate() {
            for _ in 0..15 {
                rows.push(mean.iter().map(|m| m + noise.sample(&mut rng)).collect::<Vec<f64>>());
                labels.push(SkillClass::ALL[c]);
            }
        }
        let d = ds(rows.clone(), labels.clone());
        for (c, mean) in means.iter().enumerate() {
            let scan = rows
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r.iter().zip(mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>()))
                .fold((0, f64::MAX), |acc, (i, dd)| if dd < acc.1 { (i, dd) } else { acc });
            let got = nn_classify(&d, mean, Metric::Euclidean).unwrap();
            assert_eq!(got, labels[scan.0]);
            assert_eq!(got, SkillClass::ALL[c]);
        }
    }

    #[test]
    fn permutation_invariant_without_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..4).map(|_| noise.sample(&mut rng)).collect()).collect();
        let labels: Vec<SkillClass> = (0..30).map(|i| SkillClass::ALL[i % 3]).collect();
        let mut order: Vec<usize> = (0..30).collect();
        order.shuffle(&mut rng);
        let a = ds(rows.clone(), labels.clone());
        let b = ds(order.iter().map(|&i| rows[i].clone()).collect(), order.iter().map(|&i| labels[i]).collect());
        for _ in 0..20 {
            let q: Vec<f64> = (0..4).map(|_| noise.sample(&mut rng)).collect();
            assert_eq!(
                nn_classify(&a, &q, Metric::Euclidean).unwrap(),
                nn_classify(&b, &q, Metric::Euclidean).unwrap()
            );
        }
    }
}
