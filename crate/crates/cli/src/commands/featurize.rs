use std::collections::BTreeMap;
use std::path::PathBuf;

use motionskill::baselines::{dct_features, dft_features, smt_features};
use motionskill::entropy::fused_entropy_features;
use motionskill::ingest::{
    combine_accel, early_fuse, encode_video, parse_accel_csv, parse_stip_file, single_accel, AccelOptions,
    DescriptorSet, MotionCodebook, Trial,
};
use motionskill::learn::{Criterion, SkillClass, Task};
use motionskill::synth::gen_skill_dataset;
use motionskill::{Features, Modality, Series};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codebook::codebook_path;
use super::{load_manifest, Note};
use crate::config::{ExperimentConfig, FeatureFamily, InputConfig};
use crate::error::CliError;
use crate::output::write_json;

pub const SCHEMA: &str = "motionskill.features/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub trial: String,
    pub task: Task,
    pub labels: BTreeMap<Criterion, SkillClass>,
    pub features: Features,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStore {
    pub schema: String,
    pub config: ExperimentConfig,
    /// Codebook size, when video features are included.
    pub k: Option<usize>,
    pub records: Vec<FeatureRecord>,
    pub skipped: Vec<Note>,
    pub failures: Vec<Note>,
    pub warnings: Vec<Note>,
}

pub fn store_path(cfg: &ExperimentConfig, k: Option<usize>) -> PathBuf {
    let name = match k {
        Some(k) => format!("k{k:02}.json"),
        None => "accel.json".into(),
    };
    cfg.output_dir().join("features").join(name)
}

/// The codebook sizes a run produces stores for (`None` for accelerometer only).
pub fn store_keys(cfg: &ExperimentConfig) -> Vec<Option<usize>> {
    if cfg.modality.uses_video() {
        cfg.codebook.k_grid.iter().map(|&k| Some(k)).collect()
    } else {
        vec![None]
    }
}

pub fn extract(cfg: &ExperimentConfig, series: &Series, video: bool) -> motionskill::Result<Features> {
    let fv = match cfg.family {
        FeatureFamily::Entropy => fused_entropy_features(series, &cfg.entropy.params(video)?)?,
        FeatureFamily::Dft => dft_features(series, cfg.spectral)?,
        FeatureFamily::Dct => dct_features(series, cfg.spectral)?,
        FeatureFamily::Smt => smt_features(series, cfg.smt)?,
    };
    Ok(fv.with_modality(if video { Modality::Video } else { Modality::Accel }))
}

/// Raw per-trial inputs, read once and reused across codebook sizes.
struct Loaded {
    accel: Option<Features>,
    video: Option<DescriptorSet>,
    warnings: Vec<Note>,
}

enum Outcome {
    Ready(Loaded),
    Skipped(Note),
}

fn load_trial(cfg: &ExperimentConfig, t: &Trial) -> Result<Outcome, CliError> {
    let mut warnings = Vec::new();
    let accel = if cfg.modality.uses_accel() {
        let sensors = t.accel_sensors().map_err(CliError::trial(&t.id))?;
        let traces = sensors
            .iter()
            .map(|(id, path)| {
                let parsed = parse_accel_csv(path, AccelOptions::new(*id)).map_err(CliError::trial(&t.id))?;
                warnings.extend(parsed.warnings.iter().map(|w| Note::new(&t.id, w)));
                Ok(parsed.value)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let series = match traces.as_slice() {
            [] => return Ok(Outcome::Skipped(Note::new(&t.id, "no accelerometer data"))),
            [one] => single_accel(one),
            [a, b] => {
                let combined = combine_accel(a, b).map_err(CliError::trial(&t.id))?;
                warnings.extend(combined.warnings.iter().map(|w| Note::new(&t.id, w)));
                combined.value
            }
            _ => unreachable!("manifest allows at most two sensors"),
        };
        Some(extract(cfg, &series, false).map_err(CliError::trial(&t.id))?)
    } else {
        None
    };
    let video = if cfg.modality.uses_video() {
        let Some(path) = &t.video else {
            return Ok(Outcome::Skipped(Note::new(&t.id, "no video descriptors")));
        };
        let parsed = parse_stip_file(path).map_err(CliError::trial(&t.id))?;
        warnings.extend(parsed.warnings.iter().map(|w| Note::new(&t.id, w)));
        Some(parsed.value)
    } else {
        None
    };
    Ok(Outcome::Ready(Loaded { accel, video, warnings }))
}

fn trial_features(cfg: &ExperimentConfig, t: &Trial, loaded: &Loaded, book: Option<&MotionCodebook>) -> Result<(Features, Vec<Note>), CliError> {
    let mut warnings = Vec::new();
    let video = match (&loaded.video, book) {
        (Some(set), Some(book)) => {
            let encoded = encode_video(set, book).map_err(CliError::trial(&t.id))?;
            warnings.extend(encoded.warnings.iter().map(|w| Note::new(&t.id, w)));
            Some(extract(cfg, &encoded.value, true).map_err(CliError::trial(&t.id))?)
        }
        _ => None,
    };
    let features = match (video, loaded.accel.clone()) {
        (Some(v), Some(a)) => early_fuse(v, a),
        (Some(v), None) => v,
        (None, Some(a)) => a,
        (None, None) => Features::empty(),
    };
    Ok((features, warnings))
}

/// Builds and writes one feature store per codebook size (or one for accelerometer runs).
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<FeatureStore>, CliError> {
    let stores = match &cfg.input {
        InputConfig::Synthetic { .. } => vec![synthetic_store(cfg)?],
        InputConfig::Manifest { .. } => manifest_stores(cfg)?,
    };
    for s in &stores {
        write_json(&store_path(cfg, s.k), s)?;
    }
    let failed: usize = stores.iter().map(|s| s.failures.len()).max().unwrap_or(0);
    if failed > 0 {
        for f in &stores[0].failures {
            log::error!("trial {}: {}", f.trial, f.message);
        }
        let total = failed + stores[0].records.len() + stores[0].skipped.len();
        return Err(CliError::Partial { failed, total });
    }
    Ok(stores)
}

fn synthetic_store(cfg: &ExperimentConfig) -> Result<FeatureStore, CliError> {
    let spec = cfg.skill_spec().expect("synthetic input");
    let ds = gen_skill_dataset(&spec)?;
    let records = ds
        .samples
        .par_iter()
        .map(|s| {
            let labels = cfg.task.criteria().iter().map(|&c| (c, s.class)).collect();
            Ok(FeatureRecord {
                trial: s.id.clone(),
                task: cfg.task,
                labels,
                features: extract(cfg, &s.series, false).map_err(CliError::trial(&s.id))?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(FeatureStore {
        schema: SCHEMA.into(),
        config: cfg.clone(),
        k: None,
        records,
        skipped: vec![],
        failures: vec![],
        warnings: vec![],
    })
}

fn manifest_stores(cfg: &ExperimentConfig) -> Result<Vec<FeatureStore>, CliError> {
    let manifest = load_manifest(cfg)?;
    let books = store_keys(cfg)
        .into_iter()
        .map(|k| match k {
            Some(k) => {
                let path = codebook_path(cfg, k);
                MotionCodebook::load(&path)
                    .map(Some)
                    .map_err(|e| CliError::Config(format!("codebook for K={k} unavailable (run `codebook` first): {e}")))
            }
            None => Ok(None),
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut skipped = Vec::new();
    let trials: Vec<&Trial> = manifest
        .trials
        .iter()
        .filter(|t| {
            if t.task != cfg.task {
                skipped.push(Note::new(&t.id, format!("task {} not evaluated", t.task)));
            }
            t.task == cfg.task
        })
        .collect();
    if manifest.trials.is_empty() {
        log::warn!("manifest lists no trials");
    }

    let loaded: Vec<Result<Outcome, CliError>> = trials.par_iter().map(|t| load_trial(cfg, t)).collect();
    let mut failures = Vec::new();
    let mut ready = Vec::new();
    let mut warnings = Vec::new();
    for (t, outcome) in trials.iter().zip(loaded) {
        match outcome {
            Ok(Outcome::Ready(l)) => ready.push((*t, l)),
            Ok(Outcome::Skipped(note)) => {
                log::warn!("skipping trial {}: {}", note.trial, note.message);
                skipped.push(note)
            }
            Err(e) => failures.push(Note::new(&t.id, e)),
        }
    }
    for (_, l) in &mut ready {
        warnings.append(&mut l.warnings);
    }

    books
        .iter()
        .map(|book| {
            let per_trial: Vec<Result<(FeatureRecord, Vec<Note>), CliError>> = ready
                .par_iter()
                .map(|(t, l)| {
                    let (features, notes) = trial_features(cfg, t, l, book.as_ref())?;
                    let record = FeatureRecord {
                        trial: t.id.clone(),
                        task: t.task,
                        labels: t.labels.clone(),
                        features,
                    };
                    Ok((record, notes))
                })
                .collect();
            let mut store = FeatureStore {
                schema: SCHEMA.into(),
                config: cfg.clone(),
                k: book.as_ref().map(|b| b.k()),
                records: vec![],
                skipped: skipped.clone(),
                failures: failures.clone(),
                warnings: warnings.clone(),
            };
            for ((t, _), r) in ready.iter().zip(per_trial) {
                match r {
                    Ok((rec, notes)) => {
                        store.records.push(rec);
                        store.warnings.extend(notes);
                    }
                    Err(e) => store.failures.push(Note::new(&t.id, e)),
                }
            }
            if store.records.is_empty() {
                log::warn!("feature store for {:?} is empty", store.k);
            }
            Ok(store)
        })
        .collect()
}
