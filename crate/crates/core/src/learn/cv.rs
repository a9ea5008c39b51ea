//! Leave-one-out and stratified k-fold cross-validation of the
//! selection + nearest-neighbour pipeline.

use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{CriterionDataset, SkillClass};
use super::nn::{nearest, Metric};
use super::sffs::{sffs_on, LoocvAccuracy, Objective};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Scheme {
    Loocv,
    KFold { k: usize, seed: u64 },
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Loocv => f.write_str("loocv"),
            Scheme::KFold { k, .. } => write!(f, "{k}-fold"),
        }
    }
}

/// Where feature selection runs relative to the folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Use every feature.
    None,
    /// SFFS on each fold's training samples only.
    #[default]
    InsideFolds,
    /// SFFS once on the whole dataset, then cross-validate the chosen subset.
    /// Lets test samples influence selection; kept to replicate published numbers.
    PaperProtocol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub max_dim: usize,
    pub mode: SelectionMode,
    pub metric: Metric,
    #[serde(skip)]
    leak_held_out: bool,
}

impl Default for Pipeline {
    fn default() -> Self {
        Self {
            max_dim: 10,
            mode: SelectionMode::InsideFolds,
            metric: Metric::Euclidean,
            leak_held_out: false,
        }
    }
}

impl Pipeline {
    pub fn new(max_dim: usize, mode: SelectionMode, metric: Metric) -> Self {
        Self {
            max_dim,
            mode,
            metric,
            leak_held_out: false,
        }
    }

    /// Puts each held-out sample back into its own training set. Exists only
    /// to demonstrate that the leak-free default actually excludes it.
    #[cfg(any(test, feature = "leak-probe"))]
    pub fn leaking_held_out(mut self) -> Self {
        self.leak_held_out = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub test: Vec<usize>,
    pub correct: usize,
    pub accuracy: f64,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub scheme: Scheme,
    pub selection_mode: SelectionMode,
    pub objective: String,
    pub folds: Vec<FoldResult>,
    /// Correct predictions over all samples (fold accuracies weighted by size).
    pub accuracy: f64,
    /// Population std of per-fold accuracies.
    pub fold_std: f64,
    /// `confusion[truth][predicted]`, indexed by [`SkillClass::index`].
    pub confusion: [[usize; 3]; 3],
}

impl CvReport {
    pub fn per_fold_accuracy(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }
}

/// Test-index sets for each fold.
///
/// k-fold is stratified: each class is shuffled with its own seeded stream and
/// dealt round-robin, continuing where the previous class stopped so fold
/// sizes stay within one of each other.
pub fn fold_indices<T: Scalar>(data: &CriterionDataset<T>, scheme: Scheme) -> Result<Vec<Vec<usize>>> {
    match scheme {
        Scheme::Loocv => Ok((0..data.len()).map(|i| vec![i]).collect()),
        Scheme::KFold { k, seed } => {
            if k < 2 || k > data.len() {
                return Err(Error::Parameter(format!(
                    "{k}-fold needs 2 <= k <= {} samples",
                    data.len()
                )));
            }
            let mut folds = vec![Vec::new(); k];
            let mut next = 0;
            for class in SkillClass::ALL {
                let mut members: Vec<usize> = (0..data.len()).filter(|&i| data.label(i) == class).collect();
                members.shuffle(&mut substream(seed, "kfold", class.index() as u64));
                for i in members {
                    folds[next].push(i);
                    next = (next + 1) % k;
                }
            }
            for f in &mut folds {
                f.sort_unstable();
            }
            let counts = data.class_counts();
            for (fold, test) in folds.iter().enumerate() {
                for class in SkillClass::ALL {
                    let held = test.iter().filter(|&&i| data.label(i) == class).count();
                    if counts[class.index()] > 0 && held == counts[class.index()] {
                        return Err(Error::Stratification {
                            class: class.to_string(),
                            fold,
                        });
                    }
                }
            }
            Ok(folds)
        }
    }
}

/// Cross-validates with the default LOOCV-accuracy objective for selection.
pub fn cross_validate<T: Scalar>(data: &CriterionDataset<T>, scheme: Scheme, pipeline: &Pipeline) -> Result<CvReport> {
    let objective = LoocvAccuracy {
        metric: pipeline.metric,
    };
    cross_validate_with(data, scheme, pipeline, &objective)
}

pub fn cross_validate_with<T: Scalar>(
    data: &CriterionDataset<T>,
    scheme: Scheme,
    pipeline: &Pipeline,
    objective: &dyn Objective<T>,
) -> Result<CvReport> {
    let folds = fold_indices(data, scheme)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let global = match pipeline.mode {
        SelectionMode::PaperProtocol => Some(sffs_on(data, &all, pipeline.max_dim, objective).selected),
        SelectionMode::None => Some(all_features(data)),
        SelectionMode::InsideFolds => None,
    };

    let results: Vec<(FoldResult, Vec<(SkillClass, SkillClass)>)> = folds
        .par_iter()
        .map(|test| {
            let train: Vec<usize> = if pipeline.leak_held_out {
                all.clone()
            } else {
                all.iter().copied().filter(|i| test.binary_search(i).is_err()).collect()
            };
            let selected = match &global {
                Some(cols) => cols.clone(),
                None => sffs_on(data, &train, pipeline.max_dim, objective).selected,
            };
            // an empty selection degenerates to "every sample is equidistant"
            let cols = if selected.is_empty() { Vec::new() } else { selected.clone() };
            let pairs: Vec<(SkillClass, SkillClass)> = test
                .iter()
                .map(|&i| {
                    let j = nearest(data.rows(), train.iter().copied(), data.row(i), &cols, pipeline.metric)
                        .expect("training fold is non-empty");
                    (data.label(i), data.label(j))
                })
                .collect();
            let correct = pairs.iter().filter(|(t, p)| t == p).count();
            let fold = FoldResult {
                test: test.clone(),
                correct,
                accuracy: correct as f64 / test.len() as f64,
                selected,
            };
            (fold, pairs)
        })
        .collect();

    let mut confusion = [[0usize; 3]; 3];
    let mut folds_out = Vec::with_capacity(results.len());
    for (fold, pairs) in results {
        for (t, p) in pairs {
            confusion[t.index()][p.index()] += 1;
        }
        folds_out.push(fold);
    }
    let total_correct: usize = folds_out.iter().map(|f| f.correct).sum();
    let accs: Vec<f64> = folds_out.iter().map(|f| f.accuracy).collect();
    Ok(CvReport {
        scheme,
        selection_mode: pipeline.mode,
        objective: objective.name(),
        accuracy: total_correct as f64 / data.len() as f64,
        fold_std: population_std(&accs),
        folds: folds_out,
        confusion,
    })
}

fn all_features<T: Scalar>(data: &CriterionDataset<T>) -> Vec<usize> {
    (0..data.dim()).collect()
}

pub(crate) fn population_std(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}
