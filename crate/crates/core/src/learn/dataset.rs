use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scalar::Scalar;
use crate::series::MultiTimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkillClass {
    Beginner,
    Intermediate,
    Expert,
}

impl SkillClass {
    pub const ALL: [SkillClass; 3] = [SkillClass::Beginner, SkillClass::Intermediate, SkillClass::Expert];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SkillClass::Beginner => "beginner",
            SkillClass::Intermediate => "intermediate",
            SkillClass::Expert => "expert",
        }
    }
}

impl fmt::Display for SkillClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SkillClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SkillClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown skill class {s:?}")))
    }
}

/// OSATS grading criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    /// Respect for tissue
    RT,
    /// Time and motion
    TM,
    /// Instrument handling
    IH,
    /// Suture handling
    SH,
    /// Flow of operation
    FO,
    /// Knowledge of procedure
    KP,
    /// Overall performance
    OP,
}

impl Criterion {
    pub const ALL: [Criterion; 7] = [
        Criterion::RT,
        Criterion::TM,
        Criterion::IH,
        Criterion::SH,
        Criterion::FO,
        Criterion::KP,
        Criterion::OP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::RT => "RT",
            Criterion::TM => "TM",
            Criterion::IH => "IH",
            Criterion::SH => "SH",
            Criterion::FO => "FO",
            Criterion::KP => "KP",
            Criterion::OP => "OP",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown OSATS criterion {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Suturing,
    KnotTying,
}

impl Task {
    /// Criteria graded for this task.
    pub fn criteria(self) -> &'static [Criterion] {
        match self {
            Task::Suturing => &[Criterion::RT, Criterion::TM, Criterion::IH, Criterion::SH, Criterion::FO],
            Task::KnotTying => &[Criterion::TM, Criterion::SH, Criterion::FO, Criterion::OP],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Suturing => "suturing",
            Task::KnotTying => "knot_tying",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "suturing" => Ok(Task::Suturing),
            "knot_tying" => Ok(Task::KnotTying),
            _ => Err(Error::Parameter(format!("unknown task {s:?}"))),
        }
    }
}

/// Feature matrix with one skill label per row, for a single OSATS criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionDataset<T> {
    criterion: Criterion,
    task: Task,
    features: Vec<Vec<T>>,
    labels: Vec<SkillClass>,
    feature_names: Vec<String>,
}

impl<T: Scalar> CriterionDataset<T> {
    pub fn from_matrix(criterion: Criterion, task: Task, features: Vec<Vec<T>>, labels: Vec<SkillClass>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let dim = features.first().map_or(0, Vec::len);
        if let Some(i) = features.iter().position(|r| r.len() != dim) {
            return Err(Error::Shape(format!(
                "sample {i} has {} features, sample 0 has {dim}",
                features[i].len()
            )));
        }
        let classes: BTreeSet<SkillClass> = labels.iter().copied().collect();
        if classes.len() < 2 {
            return Err(Error::Data(format!(
                "{criterion}: need at least two distinct classes, found {}",
                classes.len()
            )));
        }
        let feature_names = (0..dim).map(|i| format!("f{i}")).collect();
        Ok(Self {
            criterion,
            task,
            features,
            labels,
            feature_names,
        })
    }

    /// Builds a dataset from labelled feature vectors; names come from the first vector's tags.
    pub fn from_vectors(criterion: Criterion, task: Task, samples: Vec<(FeatureVector<T>, SkillClass)>) -> Result<Self> {
        let names = samples.first().map(|(fv, _)| fv.tags());
        let (features, labels): (Vec<Vec<T>>, Vec<SkillClass>) =
            samples.into_iter().map(|(fv, c)| (fv.into_values(), c)).unzip();
        let mut ds = Self::from_matrix(criterion, task, features, labels)?;
        if let Some(names) = names {
            ds.feature_names = names;
        }
        Ok(ds)
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.features
    }

    pub fn label(&self, i: usize) -> SkillClass {
        self.labels[i]
    }

    pub fn labels(&self) -> &[SkillClass] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Samples per class, indexed by [`SkillClass::index`].
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for c in &self.labels {
            counts[c.index()] += 1;
        }
        counts
    }

    /// Keeps only the listed feature columns, in the given order.
    pub fn select_features(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.dim()) {
            return Err(Error::Shape(format!("feature index {c} out of range {}", self.dim())));
        }
        Ok(Self {
            criterion: self.criterion,
            task: self.task,
            features: self
                .features
                .iter()
                .map(|r| cols.iter().map(|&c| r[c]).collect())
                .collect(),
            labels: self.labels.clone(),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
        })
    }
}

/// A labelled raw series, before feature extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSample<T> {
    pub id: String,
    pub series: MultiTimeSeries<T>,
    pub class: SkillClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDataset<T> {
    pub criterion: Criterion,
    pub task: Task,
    pub samples: Vec<SeriesSample<T>>,
}

impl<T: Scalar> SeriesDataset<T> {
    /// Applies a feature extractor to every sample.
    pub fn featurize<F>(&self, extract: F) -> Result<CriterionDataset<T>>
    where
        F: Fn(&MultiTimeSeries<T>) -> Result<FeatureVector<T>> + Sync,
    {
        use rayon::prelude::*;
        let vectors: Vec<(FeatureVector<T>, SkillClass)> = self
            .samples
            .par_iter()
            .map(|s| extract(&s.series).map(|fv| (fv, s.class)))
            .collect::<Result<_>>()?;
        CriterionDataset::from_vectors(self.criterion, self.task, vectors)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_rejected() {
        let err = CriterionDataset::<f64>::from_matrix(
            Criterion::RT,
            Task::Suturing,
            vec![vec![1.0], vec![2.0]],
            vec![SkillClass::Expert; 2],
        );
        assert!(matches!(err, Err(Error::Data(_))));
    }

    #[test]
    fn ragged_features_rejected() {
        let err = CriterionDataset::<f64>::from_matrix(
            Criterion::RT,
            Task::Suturing,
            vec![vec![1.0], vec![2.0, 3.0]],
            vec![SkillClass::Expert, SkillClass::Beginner],
        );
        assert!(matches!(err, Err(Error::Shape(_))));
    }

    #[test]
    fn names_round_trip() {
        assert_eq!("knot-tying".parse::<Task>().unwrap(), Task::KnotTying);
        assert_eq!("op".parse::<Criterion>().unwrap(), Criterion::OP);
        assert_eq!("Expert".parse::<SkillClass>().unwrap(), SkillClass::Expert);
        assert_eq!(Task::Suturing.criteria().len(), 5);
        assert_eq!(Task::KnotTying.criteria().len(), 4);
    }
}
