//! Sequential floating forward selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::CriterionDataset;
use super::nn::{nearest, Metric};
use crate::scalar::Scalar;

/// Scores a feature subset on a subset of samples. Higher is better.
pub trait Objective<T>: Sync {
    fn name(&self) -> String;

    /// `rows` are sample indices (ascending), `cols` feature indices (ascending, non-empty).
    fn score(&self, data: &CriterionDataset<T>, rows: &[usize], cols: &[usize]) -> f64;
}

/// Leave-one-out 1-NN accuracy restricted to the given samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoocvAccuracy {
    pub metric: Metric,
}

impl<T: Scalar> Objective<T> for LoocvAccuracy {
    fn name(&self) -> String {
        format!("loocv_1nn_{:?}", self.metric).to_lowercase()
    }

    fn score(&self, data: &CriterionDataset<T>, rows: &[usize], cols: &[usize]) -> f64 {
        if rows.len() < 2 {
            return 0.0;
        }
        let correct = rows
            .iter()
            .filter(|&&i| {
                let others = rows.iter().copied().filter(|&j| j != i);
                nearest(data.rows(), others, data.row(i), cols, self.metric)
                    .is_some_and(|j| data.label(j) == data.label(i))
            })
            .count();
        correct as f64 / rows.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "action", content = "feature")]
pub enum Move {
    Add(usize),
    Remove(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub change: Move,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Selected feature indices, ascending.
    pub selected: Vec<usize>,
    pub trace: Vec<Step>,
    pub objective_name: String,
    /// Objective of `selected`; `None` when nothing was selected.
    pub objective: Option<f64>,
}

/// SFFS over all samples of `data`.
pub fn sffs<T: Scalar>(data: &CriterionDataset<T>, max_dim: usize, objective: &dyn Objective<T>) -> SelectionResult {
    let rows: Vec<usize> = (0..data.len()).collect();
    sffs_on(data, &rows, max_dim, objective)
}

/// SFFS using only the samples in `rows`.
///
/// Each round adds the feature with the best objective, then repeatedly drops
/// whichever selected feature's removal strictly improves the objective.
/// Search stops when the best addition does not strictly improve on the
/// current subset or `max_dim` features are selected. Every accepted step
/// strictly increases the objective, so the search cannot cycle. Ties pick
/// the lowest feature index.
pub fn sffs_on<T: Scalar>(
    data: &CriterionDataset<T>,
    rows: &[usize],
    max_dim: usize,
    objective: &dyn Objective<T>,
) -> SelectionResult {
    let mut selected: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut current: Option<f64> = None;
    let limit = max_dim.min(data.dim());

    while selected.len() < limit {
        let candidates: Vec<usize> = (0..data.dim()).filter(|f| !selected.contains(f)).collect();
        let scored: Vec<(usize, f64)> = candidates
            .par_iter()
            .map(|&f| {
                let subset = with(&selected, f);
                (f, objective.score(data, rows, &subset))
            })
            .collect();
        let Some((best_f, best)) = argmax(&scored) else { break };
        if current.is_some_and(|c| best <= c) {
            break;
        }
        selected = with(&selected, best_f);
        current = Some(best);
        trace.push(Step {
            change: Move::Add(best_f),
            objective: best,
        });

        while selected.len() >= 2 {
            let scored: Vec<(usize, f64)> = selected
                .par_iter()
                .map(|&g| (g, objective.score(data, rows, &without(&selected, g))))
                .collect();
            let Some((worst_g, reduced)) = argmax(&scored) else { break };
            if current.is_some_and(|c| reduced > c) {
                selected = without(&selected, worst_g);
                current = Some(reduced);
                trace.push(Step {
                    change: Move::Remove(worst_g),
                    objective: reduced,
                });
            } else {
                break;
            }
        }
    }

    SelectionResult {
        selected,
        trace,
        objective_name: objective.name(),
        objective: current,
    }
}

/// First entry with the maximal score (entries are in ascending index order).
fn argmax(scored: &[(usize, f64)]) -> Option<(usize, f64)> {
    scored
        .iter()
        .copied()
        .fold(None, |best, (f, s)| match best {
            Some((_, bs)) if s <= bs => best,
            _ => Some((f, s)),
        })
}

fn with(sorted: &[usize], f: usize) -> Vec<usize> {
    let mut v = sorted.to_vec();
    let pos = v.partition_point(|&x| x < f);
    v.insert(pos, f);
    v
}

fn without(sorted: &[usize], f: usize) -> Vec<usize> {
    sorted.iter().copied().filter(|&x| x != f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::dataset::{Criterion, SkillClass, Task};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// 30 samples, 21 noise features; feature 7 carries the class as a clean offset.
    fn separable_at_7(seed: u64) -> CriterionDataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let class = i % 3;
            let mut r: Vec<f64> = (0..21).map(|_| noise.sample(&mut rng)).collect();
            r[7] = class as f64 * 100.0 + noise.sample(&mut rng) * 0.1;
            rows.push(r);
            labels.push(SkillClass::ALL[class]);
        }
        CriterionDataset::from_matrix(Criterion::RT, Task::Suturing, rows, labels).unwrap()
    }

    #[test]
    fn separating_feature_selected_first() {
        let data = separable_at_7(5);
        let obj = LoocvAccuracy::default();
        let all: Vec<usize> = (0..30).collect();
        // singleton scores: feature 7 is the only one reaching 1.0
        let singles: Vec<f64> = (0..21).map(|f| obj.score(&data, &all, &[f])).collect();
        assert_eq!(singles[7], 1.0);
        assert!(singles.iter().enumerate().all(|(f, &s)| f == 7 || s < 1.0));

        let res = sffs(&data, 5, &obj);
        assert_eq!(res.trace[0].change, Move::Add(7));
        assert_eq!(res.selected, vec![7]);
        assert_eq!(res.objective, Some(1.0));
    }

    #[test]
    fn zero_budget_selects_nothing() {
        let res = sffs(&separable_at_7(1), 0, &LoocvAccuracy::default());
        assert!(res.selected.is_empty());
        assert_eq!(res.objective, None);
        assert!(res.trace.is_empty());
    }

    #[test]
    fn duplicate_feature_never_added() {
        let base = separable_at_7(2);
        let rows: Vec<Vec<f64>> = base
            .rows()
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.push(r[7]);
                r
            })
            .collect();
        let data = CriterionDataset::from_matrix(Criterion::RT, Task::Suturing, rows, base.labels().to_vec()).unwrap();
        let res = sffs(&data, 10, &LoocvAccuracy::default());
        assert!(res.selected.contains(&7));
        assert!(!res.selected.contains(&21));
    }

    #[test]
    fn trace_increases_and_final_value_reproduces() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let labels: Vec<SkillClass> = (0..24).map(|i| SkillClass::ALL[i % 3]).collect();
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .map(|c| (0..12).map(|f| noise.sample(&mut rng) + if f < 3 { c.index() as f64 * 0.8 } else { 0.0 }).collect())
            .collect();
        let data = CriterionDataset::from_matrix(Criterion::FO, Task::Suturing, rows, labels).unwrap();
        let obj = LoocvAccuracy::default();
        let res = sffs(&data, 8, &obj);
        assert!(res.trace.windows(2).all(|w| w[1].objective > w[0].objective));
        let all: Vec<usize> = (0..data.len()).collect();
        assert_eq!(Some(obj.score(&data, &all, &res.selected)), res.objective);
        assert_eq!(res.trace.last().map(|s| s.objective), res.objective);
    }
}
