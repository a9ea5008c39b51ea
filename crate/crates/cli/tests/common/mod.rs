//! On-disk trial corpus and helpers shared by the CLI test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use motionskill::learn::SkillClass;
use motionskill::rng::substream;
use motionskill::synth::{gen_skill_dataset, SkillDatasetSpec};
use rand::Rng;
use rand_distr::StandardNormal;

pub const DESCRIPTOR_LEN: usize = 8;
pub const MOTION_CLASSES: usize = 4;
pub const FRAMES: usize = 120;

/// STIP text for one trial. Experts cycle through motion classes on a fixed
/// schedule; lower skill levels switch classes at random more often.
pub fn stip_text(class: SkillClass, seed: u64, index: u64) -> String {
    let mut rng = substream(seed, "fixture-stip", index);
    let p_random = match class {
        SkillClass::Expert => 0.0,
        SkillClass::Intermediate => 0.35,
        SkillClass::Beginner => 0.8,
    };
    let mut s = format!("# synthetic descriptors\n# video_length_frames {FRAMES}\n");
    for frame in 1..=FRAMES {
        let points = if class == SkillClass::Expert { 2 } else { rng.random_range(0..4) };
        for _ in 0..points {
            let motion = if rng.random_bool(p_random) {
                rng.random_range(0..MOTION_CLASSES)
            } else {
                (frame / 10) % MOTION_CLASSES
            };
            let _ = write!(s, "{} {} {frame} 4 2 {:.3}", rng.random_range(0..240), rng.random_range(0..320), rng.random::<f64>());
            for d in 0..DESCRIPTOR_LEN {
                let centre = if d % MOTION_CLASSES == motion { 3.0 } else { 0.0 };
                let _ = write!(s, " {:.5}", centre + 0.3 * rng.sample::<f64, _>(StandardNormal));
            }
            s.push('\n');
        }
    }
    s
}

pub fn accel_csv(rows: [&[f64]; 3]) -> String {
    let mut s = String::from("timestamp,x,y,z\n");
    for t in 0..rows[0].len() {
        let _ = writeln!(s, "{},{},{},{}", t as f64 / 100.0, rows[0][t], rows[1][t], rows[2][t]);
    }
    s
}

pub struct Corpus {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub trial_ids: Vec<String>,
}

/// Writes `per_class` suturing trials per skill class with video and two
/// accelerometers, plus `manifest.json`.
pub fn write_corpus(dir: &Path, per_class: usize, seed: u64) -> Corpus {
    std::fs::create_dir_all(dir.join("stip")).unwrap();
    std::fs::create_dir_all(dir.join("accel")).unwrap();
    let ds = gen_skill_dataset(&SkillDatasetSpec {
        per_class,
        dims: 6,
        length: 512,
        seed,
        ..Default::default()
    })
    .unwrap();
    let mut trials = Vec::new();
    let mut ids = Vec::new();
    for (i, s) in ds.samples.iter().enumerate() {
        let id = format!("t{i:02}");
        std::fs::write(dir.join(format!("stip/{id}.txt")), stip_text(s.class, seed, i as u64)).unwrap();
        let r: Vec<&[f64]> = s.series.rows().collect();
        std::fs::write(dir.join(format!("accel/{id}_l.csv")), accel_csv([r[0], r[1], r[2]])).unwrap();
        std::fs::write(dir.join(format!("accel/{id}_r.csv")), accel_csv([r[3], r[4], r[5]])).unwrap();
        let labels: BTreeMap<&str, &str> = ["RT", "TM", "IH", "SH", "FO"].iter().map(|c| (*c, s.class.as_str())).collect();
        trials.push(serde_json::json!({
            "id": id,
            "task": "suturing",
            "expert": s.class == SkillClass::Expert,
            "video": format!("stip/{id}.txt"),
            "accel": {"left_wrist": format!("accel/{id}_l.csv"), "right_wrist": format!("accel/{id}_r.csv")},
            "labels": labels,
        }));
        ids.push(id);
    }
    let manifest = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&serde_json::json!({"version": 1, "trials": trials})).unwrap();
    std::fs::write(&manifest, text).unwrap();
    Corpus {
        dir: dir.to_path_buf(),
        manifest,
        trial_ids: ids,
    }
}

/// A small config over the corpus: fused entropy features, three codebook
/// sizes, reduced synthetic sweeps.
pub fn write_config(path: &Path, manifest: &Path, extra: &str) {
    let text = format!(
        r#"seed = 11
modality = "fused"
schemes = ["loocv", "2-fold"]
{extra}
[input]
source = "manifest"
path = "{}"

[codebook]
k_grid = [2, 3, 4]

[selection]
max_dim = 4

[synth]
snr_grid = [1.0, 5.0, 20.0]
reps = 2
length = 256
phase_points = 3
"#,
        manifest.display()
    );
    std::fs::write(path, text).unwrap();
}

pub fn motionskill(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motionskill"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MOTIONSKILL_OUT")
        .output()
        .expect("binary runs")
}

/// Relative path → bytes of every file under `dir`.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}
