//! Feature selection, nearest-neighbour classification, cross-validation and
//! OSATS-level aggregation.

mod cv;
mod dataset;
mod nn;
mod osats;
mod sffs;

pub use cv::{cross_validate, cross_validate_with, fold_indices, CvReport, FoldResult, Pipeline, Scheme, SelectionMode};
pub use dataset::{Criterion, CriterionDataset, SeriesDataset, SeriesSample, SkillClass, Task};
pub use nn::{nn_classify, Metric};
pub use osats::{average_accuracy, evaluate_osats, sweep_k, CriterionReport, KSweep, OsatsTable};
pub use sffs::{sffs, sffs_on, LoocvAccuracy, Move, Objective, SelectionResult, Step};
