use std::collections::BTreeMap;
use std::fmt::Write as _;

use motionskill::learn::{evaluate_osats, sweep_k, Criterion, CriterionDataset, OsatsTable, SelectionMode, Task};
use serde::{Deserialize, Serialize};

use super::featurize::{store_keys, store_path, FeatureStore};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{read_json, write_csv, write_json};

pub const SCHEMA: &str = "motionskill.evaluation/v1";
pub const TABLE_SCHEMA: &str = "motionskill.table/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSummary {
    pub k: usize,
    pub average_accuracy: f64,
    pub std_across_criteria: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: String,
    pub best_k: Option<usize>,
    /// Average accuracy for every K tried (video and fused runs).
    pub k_sweep: Vec<KSummary>,
    /// Table for the best K (or the only table).
    pub table: OsatsTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCriterion {
    pub criterion: Criterion,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub schema: String,
    pub config: ExperimentConfig,
    pub feature: String,
    pub task: Task,
    pub modality: String,
    pub selection_mode: SelectionMode,
    pub results: Vec<SchemeResult>,
    pub skipped_criteria: Vec<SkippedCriterion>,
}

/// Criteria of `task` with enough labelled trials to classify, and the ones left out.
fn datasets(store: &FeatureStore, task: Task) -> motionskill::Result<(Vec<CriterionDataset<f64>>, Vec<SkippedCriterion>)> {
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for &c in task.criteria() {
        let samples: Vec<_> = store
            .records
            .iter()
            .filter(|r| r.task == task)
            .filter_map(|r| r.labels.get(&c).map(|&class| (r.features.clone(), class)))
            .collect();
        let mut classes: Vec<_> = samples.iter().map(|s| s.1).collect();
        classes.sort();
        classes.dedup();
        if classes.len() < 2 {
            skipped.push(SkippedCriterion {
                criterion: c,
                reason: format!("{} labelled trials in {} class(es)", samples.len(), classes.len()),
            });
            continue;
        }
        out.push(CriterionDataset::from_vectors(c, task, samples)?);
    }
    if out.is_empty() {
        return Err(motionskill::Error::Data(format!("no {task} criterion has two or more labelled classes")));
    }
    Ok((out, skipped))
}

pub fn run(cfg: &ExperimentConfig) -> Result<Evaluation, CliError> {
    let keys = store_keys(cfg);
    let mut stores = BTreeMap::new();
    for k in &keys {
        let path = store_path(cfg, *k);
        let store: FeatureStore = read_json(&path)
            .map_err(|e| CliError::Config(format!("feature store unavailable (run `featurize` first): {e}")))?;
        stores.insert(*k, store);
    }
    let (_, skipped_criteria) = datasets(&stores[&keys[0]], cfg.task)?;
    let pipeline = cfg.pipeline();

    let mut results = Vec::new();
    for (name, scheme) in cfg.schemes.iter().zip(cfg.schemes()) {
        let result = if cfg.modality.uses_video() {
            let ks: Vec<usize> = keys.iter().flatten().copied().collect();
            let sweep = sweep_k(&ks, scheme, &pipeline, |k| Ok(datasets(&stores[&Some(k)], cfg.task)?.0))?;
            let k_sweep = sweep
                .tables
                .iter()
                .map(|t| KSummary {
                    k: t.k_used.unwrap_or_default(),
                    average_accuracy: t.average_accuracy,
                    std_across_criteria: t.std_across_criteria,
                })
                .collect();
            let table = sweep
                .tables
                .into_iter()
                .find(|t| t.k_used == Some(sweep.best_k))
                .expect("best K has a table");
            SchemeResult {
                scheme: name.to_string(),
                best_k: Some(sweep.best_k),
                k_sweep,
                table,
            }
        } else {
            let (ds, _) = datasets(&stores[&None], cfg.task)?;
            SchemeResult {
                scheme: name.to_string(),
                best_k: None,
                k_sweep: vec![],
                table: evaluate_osats(&ds, scheme, &pipeline)?,
            }
        };
        log::info!("{}: average accuracy {:.4}", result.scheme, result.table.average_accuracy);
        results.push(result);
    }

    let eval = Evaluation {
        schema: SCHEMA.into(),
        config: cfg.clone(),
        feature: cfg.family.as_str().into(),
        task: cfg.task,
        modality: cfg.modality.as_str().into(),
        selection_mode: pipeline.mode,
        results,
        skipped_criteria,
    };
    let dir = cfg.output_dir().join("reports");
    write_json(&dir.join("evaluation.json"), &eval)?;
    write_csv(&dir.join("table.csv"), TABLE_SCHEMA, cfg, &table_csv(&eval))?;
    Ok(eval)
}

/// One row per criterion plus an `average` row for each scheme.
pub fn table_csv(e: &Evaluation) -> String {
    let mut s = String::from("feature,task,modality,scheme,selection,k,criterion,accuracy,std\n");
    let mode = mode_name(e.selection_mode);
    for r in &e.results {
        let k = r.best_k.map(|k| k.to_string()).unwrap_or_default();
        let prefix = format!("{},{},{},{},{mode},{k}", e.feature, e.task, e.modality, r.scheme);
        for c in &r.table.criteria {
            let _ = writeln!(s, "{prefix},{},{},{}", c.criterion, c.report.accuracy, c.report.fold_std);
        }
        let _ = writeln!(
            s,
            "{prefix},average,{},{}",
            r.table.average_accuracy, r.table.std_across_criteria
        );
    }
    s
}

pub fn mode_name(mode: SelectionMode) -> &'static str {
    match mode {
        SelectionMode::None => "none",
        SelectionMode::InsideFolds => "inside_folds",
        SelectionMode::PaperProtocol => "paper_protocol",
    }
}
