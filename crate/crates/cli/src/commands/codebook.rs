use std::path::PathBuf;

use motionskill::ingest::{parse_stip_file, train_codebook, ExpertSet, MotionCodebook};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{load_manifest, Note};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{write_atomic, write_json};

pub const SCHEMA: &str = "motionskill.codebooks/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookEntry {
    pub k: usize,
    pub file: PathBuf,
    pub iterations: usize,
    pub inertia: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookIndex {
    pub schema: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub expert_trials: Vec<String>,
    pub descriptors: usize,
    pub codebooks: Vec<CodebookEntry>,
    pub warnings: Vec<Note>,
}

pub fn codebook_path(cfg: &ExperimentConfig, k: usize) -> PathBuf {
    cfg.output_dir().join("codebooks").join(format!("k{k:02}.txt"))
}

/// Trains one codebook per K on the descriptors of expert trials.
pub fn run(cfg: &ExperimentConfig) -> Result<CodebookIndex, CliError> {
    let manifest = load_manifest(cfg)?;
    let mut warnings = Vec::new();
    let experts: Vec<_> = manifest
        .experts()
        .filter(|t| {
            if t.video.is_none() {
                warnings.push(Note::new(&t.id, "expert trial has no video descriptors"));
            }
            t.video.is_some()
        })
        .collect();
    if experts.is_empty() {
        return Err(motionskill::Error::Data("manifest lists no expert trials with video".into()).into());
    }

    let sets = experts
        .par_iter()
        .map(|t| {
            let parsed = parse_stip_file(t.video.as_ref().expect("filtered")).map_err(CliError::trial(&t.id))?;
            let notes: Vec<Note> = parsed.warnings.iter().map(|w| Note::new(&t.id, w)).collect();
            let set = ExpertSet::new(&t.id, t.expert, parsed.value).map_err(CliError::trial(&t.id))?;
            Ok((set, notes))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let (sets, notes): (Vec<ExpertSet>, Vec<Vec<Note>>) = sets.into_iter().unzip();
    warnings.extend(notes.into_iter().flatten());
    let descriptors = sets.iter().map(|s| s.descriptors().len()).sum();

    let seed = cfg.codebook_seed();
    let books = cfg
        .codebook
        .k_grid
        .par_iter()
        .map(|&k| train_codebook(&sets, k, seed))
        .collect::<Result<Vec<MotionCodebook>, _>>()?;

    let mut entries = Vec::with_capacity(books.len());
    for book in &books {
        let path = codebook_path(cfg, book.k());
        write_atomic(&path, book.to_text().as_bytes())?;
        entries.push(CodebookEntry {
            k: book.k(),
            file: PathBuf::from(path.file_name().expect("file name")),
            iterations: book.meta.iterations,
            inertia: book.meta.inertia,
        });
    }
    let index = CodebookIndex {
        schema: SCHEMA.into(),
        config: cfg.clone(),
        seed,
        expert_trials: sets.iter().map(|s| s.trial().to_string()).collect(),
        descriptors,
        codebooks: entries,
        warnings,
    };
    write_json(&cfg.output_dir().join("codebooks").join("index.json"), &index)?;
    Ok(index)
}
