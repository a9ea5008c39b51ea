use std::fmt::Write as _;

use super::evaluate::{mode_name, Evaluation};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{read_json, write_atomic};

/// Plain-text accuracy table (percent), one line per scheme.
pub fn render(e: &Evaluation) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "feature={} task={} modality={} selection={}",
        e.feature,
        e.task,
        e.modality,
        mode_name(e.selection_mode)
    );
    let criteria: Vec<_> = e.task.criteria().iter().filter(|c| !e.skipped_criteria.iter().any(|k| k.criterion == **c)).collect();
    let _ = write!(s, "{:<10}{:>4}", "scheme", "K");
    for c in &criteria {
        let _ = write!(s, "{:>8}", c.as_str());
    }
    let _ = writeln!(s, "{:>16}", "mean ± std");
    for r in &e.results {
        let k = r.best_k.map_or("-".to_string(), |k| k.to_string());
        let _ = write!(s, "{:<10}{k:>4}", r.scheme);
        for c in &criteria {
            let acc = r.table.criteria.iter().find(|x| x.criterion == **c).map(|x| x.report.accuracy);
            match acc {
                Some(a) => {
                    let _ = write!(s, "{:>8.1}", 100.0 * a);
                }
                None => s.push_str("       -"),
            }
        }
        let _ = writeln!(
            s,
            "{:>9.1} ± {:<4.1}",
            100.0 * r.table.average_accuracy,
            100.0 * r.table.std_across_criteria
        );
    }
    for k in &e.skipped_criteria {
        let _ = writeln!(s, "skipped {}: {}", k.criterion, k.reason);
    }
    s
}

/// Prints the evaluation table and writes it with the run config appended.
pub fn run(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let dir = cfg.output_dir().join("reports");
    let eval: Evaluation = read_json(&dir.join("evaluation.json"))
        .map_err(|e| CliError::Config(format!("no evaluation found (run `evaluate` first): {e}")))?;
    let table = render(&eval);
    print!("{table}");
    let mut text = table.clone();
    text.push_str("\n[config]\n");
    text.push_str(&eval.config.to_toml());
    write_atomic(&dir.join("summary.txt"), text.as_bytes())?;
    Ok(table)
}
