use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, population_std, CvReport, Pipeline, Scheme};
use super::dataset::{Criterion, CriterionDataset, Task};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub report: CvReport,
}

/// Per-criterion reports and their unweighted mean accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsatsTable {
    pub task: Task,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k_used: Option<usize>,
    pub criteria: Vec<CriterionReport>,
    pub average_accuracy: f64,
    /// Population std of the per-criterion accuracies (not of folds or repeats).
    pub std_across_criteria: f64,
}

pub fn average_accuracy(accuracies: &[f64]) -> f64 {
    accuracies.iter().sum::<f64>() / accuracies.len() as f64
}

pub fn evaluate_osats<T: Scalar>(datasets: &[CriterionDataset<T>], scheme: Scheme, pipeline: &Pipeline) -> Result<OsatsTable> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::Data("no criterion datasets to evaluate".into()))?;
    let task = first.task();
    if let Some(d) = datasets.iter().find(|d| d.task() != task) {
        return Err(Error::Data(format!(
            "mixed tasks in one table: {task} and {}",
            d.task()
        )));
    }
    let criteria = datasets
        .iter()
        .map(|d| {
            Ok(CriterionReport {
                criterion: d.criterion(),
                report: cross_validate(d, scheme, pipeline)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let accs: Vec<f64> = criteria.iter().map(|c| c.report.accuracy).collect();
    Ok(OsatsTable {
        task,
        k_used: None,
        average_accuracy: average_accuracy(&accs),
        std_across_criteria: population_std(&accs),
        criteria,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweep {
    pub tables: Vec<OsatsTable>,
    pub best_k: usize,
    pub best_average_accuracy: f64,
}

/// Evaluates one table per codebook size and records the size with the
/// highest average accuracy (smallest K on ties).
pub fn sweep_k<T, F>(ks: &[usize], scheme: Scheme, pipeline: &Pipeline, mut datasets_for: F) -> Result<KSweep>
where
    T: Scalar,
    F: FnMut(usize) -> Result<Vec<CriterionDataset<T>>>,
{
    let mut tables = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut table = evaluate_osats(&datasets_for(k)?, scheme, pipeline)?;
        table.k_used = Some(k);
        tables.push(table);
    }
    let best = tables
        .iter()
        .fold(None::<&OsatsTable>, |best, t| match best {
            Some(b) if t.average_accuracy <= b.average_accuracy => Some(b),
            _ => Some(t),
        })
        .ok_or_else(|| Error::Parameter("empty K grid".into()))?;
    Ok(KSweep {
        best_k: best.k_used.unwrap_or_default(),
        best_average_accuracy: best.average_accuracy,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_criteria() {
        assert!((average_accuracy(&[0.8, 0.9, 1.0]) - 0.9).abs() < 1e-15);
        assert_eq!(average_accuracy(&[0.75]), 0.75);
    }
}
