use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::accel::SensorId;
use crate::error::{Error, Result};
use crate::learn::{Criterion, SkillClass, Task};

/// One recorded trial. Paths are relative to the manifest file unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trial {
    pub id: String,
    pub task: Task,
    /// Whether this trial may be used for codebook training.
    #[serde(default)]
    pub expert: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video: Option<PathBuf>,
    /// Accelerometer CSVs keyed by sensor; two sensors are combined in
    /// sensor-name order.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub accel: BTreeMap<String, PathBuf>,
    pub labels: BTreeMap<Criterion, SkillClass>,
}

impl Trial {
    pub fn accel_sensors(&self) -> Result<Vec<(SensorId, &Path)>> {
        self.accel
            .iter()
            .map(|(k, p)| Ok((k.parse::<SensorId>()?, p.as_path())))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub trials: Vec<Trial>,
}

impl Manifest {
    pub const VERSION: u32 = 1;

    /// Parses JSON; relative paths are resolved against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let mut m: Manifest = serde_json::from_str(text)?;
        if m.version != Self::VERSION {
            return Err(Error::Data(format!("unsupported manifest version {}", m.version)));
        }
        let mut seen = BTreeSet::new();
        for t in &mut m.trials {
            if !seen.insert(t.id.clone()) {
                return Err(Error::Data(format!("duplicate trial id {}", t.id)));
            }
            for c in t.labels.keys() {
                if !t.task.criteria().contains(c) {
                    return Err(Error::Data(format!("trial {}: {c} is not graded for {}", t.id, t.task)));
                }
            }
            t.accel_sensors()
                .map_err(|e| Error::Data(format!("trial {}: {e}", t.id)))?;
            if t.accel.len() > 2 {
                return Err(Error::Data(format!("trial {}: at most two accelerometers", t.id)));
            }
            if let Some(v) = &mut t.video {
                *v = base.join(&*v);
            }
            for p in t.accel.values_mut() {
                *p = base.join(&*p);
            }
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new("")))
    }

    pub fn experts(&self) -> impl Iterator<Item = &Trial> {
        self.trials.iter().filter(|t| t.expert)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"{
      "version": 1,
      "trials": [
        {"id": "s01", "task": "suturing", "expert": true, "video": "stip/s01.txt",
         "accel": {"left_wrist": "acc/s01_l.csv", "right_wrist": "/data/s01_r.csv"},
         "labels": {"RT": "expert", "TM": "expert"}},
        {"id": "k02", "task": "knot_tying", "labels": {"OP": "beginner"}}
      ]
    }"#;

    #[test]
    fn parses_and_resolves_paths() {
        let m = Manifest::from_json(TEXT, Path::new("/root/m")).unwrap();
        assert_eq!(m.trials.len(), 2);
        let t = &m.trials[0];
        assert_eq!(t.video.as_deref(), Some(Path::new("/root/m/stip/s01.txt")));
        assert_eq!(t.accel["left_wrist"], PathBuf::from("/root/m/acc/s01_l.csv"));
        assert_eq!(t.accel["right_wrist"], PathBuf::from("/data/s01_r.csv"));
        assert_eq!(t.labels[&Criterion::TM], SkillClass::Expert);
        assert_eq!(m.experts().count(), 1);
        assert!(!m.trials[1].expert);
    }

    #[test]
    fn rejects_bad_content() {
        let ungraded = TEXT.replace(r#""OP": "beginner""#, r#""RT": "beginner""#);
        assert!(Manifest::from_json(&ungraded, Path::new("")).is_err());
        let dup = TEXT.replace("k02", "s01");
        assert!(Manifest::from_json(&dup, Path::new("")).is_err());
        let sensor = TEXT.replace("left_wrist", "ankle");
        assert!(Manifest::from_json(&sensor, Path::new("")).is_err());
        let version = TEXT.replace(r#""version": 1"#, r#""version": 2"#);
        assert!(Manifest::from_json(&version, Path::new("")).is_err());
    }
}
