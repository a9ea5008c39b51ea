use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use motionskill::baselines::{SmtParams, SpectralParams};
use motionskill::ingest::K_GRID;
use motionskill::learn::{Metric, Pipeline, Scheme, SelectionMode, Task};
use motionskill::series::DEFAULT_RADII;
use motionskill::synth::{PhaseSweep, SkillDatasetSpec, SnrSweep};
use motionskill::EntropyParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "MOTIONSKILL_OUT";
pub const DEFAULT_OUT: &str = "motionskill-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModalityChoice {
    Video,
    Accel,
    Fused,
}

impl ModalityChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            ModalityChoice::Video => "video",
            ModalityChoice::Accel => "accel",
            ModalityChoice::Fused => "fused",
        }
    }

    pub fn uses_video(self) -> bool {
        self != ModalityChoice::Accel
    }

    pub fn uses_accel(self) -> bool {
        self != ModalityChoice::Video
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureFamily {
    /// ApEn followed by XApEn.
    Entropy,
    Dft,
    Dct,
    Smt,
}

impl FeatureFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureFamily::Entropy => "entropy",
            FeatureFamily::Dft => "dft",
            FeatureFamily::Dct => "dct",
            FeatureFamily::Smt => "smt",
        }
    }
}

/// `"loocv"` or `"<k>-fold"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SchemeName {
    Loocv,
    KFold(usize),
}

impl SchemeName {
    pub fn with_seed(self, seed: u64) -> Scheme {
        match self {
            SchemeName::Loocv => Scheme::Loocv,
            SchemeName::KFold(k) => Scheme::KFold { k, seed },
        }
    }
}

impl fmt::Display for SchemeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeName::Loocv => f.write_str("loocv"),
            SchemeName::KFold(k) => write!(f, "{k}-fold"),
        }
    }
}

impl TryFrom<String> for SchemeName {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        if s == "loocv" {
            return Ok(SchemeName::Loocv);
        }
        s.strip_suffix("-fold")
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k >= 2)
            .map(SchemeName::KFold)
            .ok_or_else(|| format!("scheme must be \"loocv\" or \"<k>-fold\" with k >= 2, got {s:?}"))
    }
}

impl From<SchemeName> for String {
    fn from(s: SchemeName) -> String {
        s.to_string()
    }
}

impl std::str::FromStr for SchemeName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SchemeName::try_from(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum InputConfig {
    /// Trials listed in a JSON manifest.
    Manifest { path: PathBuf },
    /// Generated skill series standing in for a 6-axis accelerometer pair.
    Synthetic { per_class: usize, dims: usize, length: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub m: usize,
    pub tau: usize,
    /// ApEn radii as fractions of each dimension's std.
    pub radii: Vec<f64>,
    /// XApEn radii (absolute, on z-scored series) for video series.
    pub video_cross_radii: Vec<f64>,
    /// XApEn radii for accelerometer series.
    pub accel_cross_radii: Vec<f64>,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        let video = EntropyParams::<f64>::video();
        Self {
            m: 1,
            tau: 1,
            radii: DEFAULT_RADII.to_vec(),
            video_cross_radii: video.cross_radii().to_vec(),
            accel_cross_radii: DEFAULT_RADII.to_vec(),
        }
    }
}

impl EntropyConfig {
    pub fn params(&self, video: bool) -> motionskill::Result<EntropyParams<f64>> {
        let cross = if video { &self.video_cross_radii } else { &self.accel_cross_radii };
        EntropyParams::new(self.m, self.tau, self.radii.clone(), cross.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookConfig {
    pub k_grid: Vec<usize>,
}

impl Default for CodebookConfig {
    fn default() -> Self {
        Self { k_grid: K_GRID.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub max_dim: usize,
    pub metric: Metric,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            max_dim: 10,
            metric: Metric::Euclidean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub snr_grid: Vec<f64>,
    pub radii: Vec<f64>,
    pub reps: usize,
    pub cycles: f64,
    pub length: usize,
    /// Phases sampled evenly over [0, π], endpoints included.
    pub phase_points: usize,
    pub phase_snr: f64,
    pub phase_radius: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let snr = SnrSweep::default();
        let phase = PhaseSweep::default();
        Self {
            snr_grid: snr.snr_grid,
            radii: snr.radii,
            reps: snr.reps,
            cycles: snr.cycles,
            length: snr.length,
            phase_points: phase.phases.len(),
            phase_snr: phase.snr,
            phase_radius: phase.radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root of every random stream in the run.
    pub seed: u64,
    pub task: Task,
    pub modality: ModalityChoice,
    pub family: FeatureFamily,
    /// Select features once on all samples before cross-validating.
    pub paper_protocol: bool,
    pub schemes: Vec<SchemeName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub input: InputConfig,
    pub entropy: EntropyConfig,
    pub codebook: CodebookConfig,
    pub spectral: SpectralParams,
    pub smt: SmtParams,
    pub selection: SelectionConfig,
    pub synth: SynthConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            task: Task::Suturing,
            modality: ModalityChoice::Accel,
            family: FeatureFamily::Entropy,
            paper_protocol: false,
            schemes: vec![SchemeName::Loocv],
            output_dir: None,
            input: InputConfig::Synthetic {
                per_class: 10,
                dims: 6,
                length: 1024,
            },
            entropy: EntropyConfig::default(),
            codebook: CodebookConfig::default(),
            spectral: SpectralParams::default(),
            smt: SmtParams::default(),
            selection: SelectionConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads TOML; a relative manifest path is taken relative to the config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let InputConfig::Manifest { path: m } = &mut cfg.input {
            if m.is_relative() {
                *m = path.parent().unwrap_or(Path::new("")).join(&*m);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Output root: explicit flag, then config, then environment, then default.
    pub fn resolve_output(&mut self, flag: Option<PathBuf>) {
        if let Some(dir) = flag {
            self.output_dir = Some(dir);
        } else if self.output_dir.is_none() {
            let env = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty());
            self.output_dir = Some(env.map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from));
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.entropy.params(true).map_err(|e| CliError::Config(format!("[entropy] {e}")))?;
        self.entropy.params(false).map_err(|e| CliError::Config(format!("[entropy] {e}")))?;
        if self.schemes.is_empty() {
            return bad("schemes must not be empty".into());
        }
        if self.codebook.k_grid.is_empty() {
            return bad("[codebook] k_grid must not be empty".into());
        }
        if let Some(k) = self.codebook.k_grid.iter().find(|k| !K_GRID.contains(k)) {
            return bad(format!("[codebook] K={k} is not in {K_GRID:?}"));
        }
        let mut ks = self.codebook.k_grid.clone();
        ks.sort_unstable();
        ks.dedup();
        if ks.len() != self.codebook.k_grid.len() {
            return bad("[codebook] k_grid has duplicates".into());
        }
        if self.spectral.coeffs_per_dim == 0 {
            return bad("[spectral] coeffs_per_dim must be positive".into());
        }
        if self.smt.n_windows == 0 || self.smt.quant_levels < 2 {
            return bad("[smt] needs n_windows >= 1 and quant_levels >= 2".into());
        }
        if self.selection.max_dim == 0 {
            return bad("[selection] max_dim must be positive".into());
        }
        let s = &self.synth;
        if s.reps == 0 || s.snr_grid.is_empty() || s.phase_points < 2 {
            return bad("[synth] needs reps >= 1, a non-empty snr_grid and phase_points >= 2".into());
        }
        if s.snr_grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(s.phase_snr.is_finite() && s.phase_snr > 0.0) {
            return bad("[synth] SNR values must be positive".into());
        }
        match &self.input {
            InputConfig::Manifest { path } => {
                if !path.is_file() {
                    return bad(format!("manifest {} does not exist", path.display()));
                }
            }
            InputConfig::Synthetic { per_class, dims, length } => {
                if self.modality.uses_video() {
                    return bad("synthetic input only provides accelerometer series; use modality = \"accel\"".into());
                }
                if *per_class < 4 || *dims == 0 || *length < 16 {
                    return bad("synthetic input needs per_class >= 4, dims >= 1, length >= 16".into());
                }
            }
        }
        Ok(())
    }

    pub fn pipeline(&self) -> Pipeline {
        let mode = if self.paper_protocol {
            SelectionMode::PaperProtocol
        } else {
            SelectionMode::InsideFolds
        };
        Pipeline::new(self.selection.max_dim, mode, self.selection.metric)
    }

    pub fn schemes(&self) -> Vec<Scheme> {
        let seed = derive_seed(self.seed, "cv-folds");
        self.schemes.iter().map(|s| s.with_seed(seed)).collect()
    }

    pub fn skill_spec(&self) -> Option<SkillDatasetSpec> {
        match self.input {
            InputConfig::Synthetic { per_class, dims, length } => Some(SkillDatasetSpec {
                per_class,
                dims,
                length,
                seed: derive_seed(self.seed, "synthetic-input"),
                criterion: self.task.criteria()[0],
                task: self.task,
            }),
            InputConfig::Manifest { .. } => None,
        }
    }

    pub fn snr_sweep(&self) -> SnrSweep {
        let s = &self.synth;
        SnrSweep {
            radii: s.radii.clone(),
            snr_grid: s.snr_grid.clone(),
            reps: s.reps,
            seed: derive_seed(self.seed, "synth-snr"),
            cycles: s.cycles,
            length: s.length,
            m: self.entropy.m,
            tau: self.entropy.tau,
        }
    }

    pub fn phase_sweep(&self) -> PhaseSweep {
        let s = &self.synth;
        let last = (s.phase_points - 1) as f64;
        PhaseSweep {
            phases: (0..s.phase_points).map(|i| PI * i as f64 / last).collect(),
            snr: s.phase_snr,
            reps: s.reps,
            seed: derive_seed(self.seed, "synth-phase"),
            cycles: s.cycles,
            length: s.length,
            radius: s.phase_radius,
            m: self.entropy.m,
            tau: self.entropy.tau,
        }
    }

    pub fn codebook_seed(&self) -> u64 {
        derive_seed(self.seed, "codebook")
    }
}

/// Named child seed of the run seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    motionskill::rng::child_seed(seed, label)
}
