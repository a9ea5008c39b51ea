mod common;

use std::path::Path;

use common::{motionskill, write_config, write_corpus};
use motionskill_cli::commands::evaluate::Evaluation;
use motionskill_cli::commands::featurize::FeatureStore;
use motionskill_cli::CliError;

fn read<T: serde::de::DeserializeOwned>(p: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn full_k_grid_gives_fourteen_codebooks() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&tmp.path().join("data"), 4, 1);
    let cfg = tmp.path().join("c.toml");
    write_config(&cfg, &corpus.manifest, "");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("k_grid = [2, 3, 4]", "k_grid = [2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 16, 18, 20]");
    std::fs::write(&cfg, text).unwrap();
    let out = tmp.path().join("out");
    let o = motionskill(&["-c", cfg.to_str().unwrap(), "codebook"], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let books = std::fs::read_dir(out.join("codebooks"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "txt"))
        .count();
    assert_eq!(books, 14);
}

#[test]
fn fused_pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&tmp.path().join("data"), 4, 2);
    // one trial loses its accelerometers
    let m = std::fs::read_to_string(&corpus.manifest).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&m).unwrap();
    json["trials"][0].as_object_mut().unwrap().remove("accel");
    std::fs::write(&corpus.manifest, json.to_string()).unwrap();

    let cfg = tmp.path().join("c.toml");
    write_config(&cfg, &corpus.manifest, "");
    let out = tmp.path().join("out");
    let c = cfg.to_str().unwrap();
    for cmd in ["codebook", "featurize", "evaluate", "report"] {
        let o = motionskill(&["-c", c, cmd], &out);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
    }

    let store: FeatureStore = read(&out.join("features/k03.json"));
    assert_eq!(store.records.len(), corpus.trial_ids.len() - 1);
    assert_eq!(store.skipped.len(), 1);
    assert_eq!(store.skipped[0].trial, "t00");
    // K=3 video: 3*6 ApEn + 3 pairs * 1 radius; 6-axis accel: 36 + 15 pairs * 6 radii
    let fv = &store.records[0].features;
    assert_eq!(fv.len(), 21 + 126);
    let tags = fv.tags();
    assert!(tags[..21].iter().all(|t| t.starts_with("video:")));
    assert!(tags[21..].iter().all(|t| t.starts_with("accel:")));

    let eval: Evaluation = read(&out.join("reports/evaluation.json"));
    assert_eq!(eval.results.len(), 2);
    for r in &eval.results {
        assert_eq!(r.k_sweep.len(), 3);
        assert!([2, 3, 4].contains(&r.best_k.unwrap()));
        assert_eq!(r.table.criteria.len(), 5);
    }
    let summary = std::fs::read_to_string(out.join("reports/summary.txt")).unwrap();
    assert!(summary.contains("loocv") && summary.contains("[config]"));
}

#[test]
fn paper_protocol_recorded_in_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "[input]\nsource = \"synthetic\"\nper_class = 4\ndims = 3\nlength = 128\n").unwrap();
    let c = cfg.to_str().unwrap();
    let out = tmp.path().join("out");
    assert!(motionskill(&["-c", c, "featurize"], &out).status.success());
    for (flag, mode) in [(false, "inside_folds"), (true, "paper_protocol")] {
        let mut args = vec!["-c", c, "evaluate"];
        if flag {
            args.push("--paper-protocol");
        }
        let o = motionskill(&args, &out);
        assert!(o.status.success(), "{}", stderr(&o));
        let eval: Evaluation = read(&out.join("reports/evaluation.json"));
        assert_eq!(eval.config.paper_protocol, flag);
        assert_eq!(serde_json::to_value(eval.selection_mode).unwrap(), mode);
        let table = std::fs::read_to_string(out.join("reports/table.csv")).unwrap();
        assert!(table.contains(&format!(",{mode},")));
    }
}

#[test]
fn empty_manifest_gives_empty_store() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = tmp.path().join("m.json");
    std::fs::write(&manifest, r#"{"version": 1, "trials": []}"#).unwrap();
    let cfg = tmp.path().join("c.toml");
    write_config(&cfg, &manifest, "");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("\"fused\"", "\"accel\"");
    std::fs::write(&cfg, text).unwrap();
    let out = tmp.path().join("out");
    let o = motionskill(&["-c", cfg.to_str().unwrap(), "featurize"], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let store: FeatureStore = read(&out.join("features/accel.json"));
    assert!(store.records.is_empty());
    assert!(stderr(&o).contains("no trials"));
}

#[test]
fn missing_file_names_trial_and_exits_with_data_code() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&tmp.path().join("data"), 4, 3);
    std::fs::remove_file(corpus.dir.join("stip/t05.txt")).unwrap();
    let cfg = tmp.path().join("c.toml");
    write_config(&cfg, &corpus.manifest, "");
    let o = motionskill(&["-c", cfg.to_str().unwrap(), "codebook"], &tmp.path().join("out"));
    // t05 is not an expert trial, so codebook training never reads it
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::remove_file(corpus.dir.join("stip/t10.txt")).unwrap();
    let o = motionskill(&["-c", cfg.to_str().unwrap(), "codebook"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(i32::from(CliError::DATA)));
    assert!(stderr(&o).contains("trial t10"), "{}", stderr(&o));

    let o = motionskill(&["-c", cfg.to_str().unwrap(), "featurize"], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(i32::from(CliError::DATA)));
    let store: FeatureStore = read(&tmp.path().join("out/features/k02.json"));
    let failed: Vec<&str> = store.failures.iter().map(|f| f.trial.as_str()).collect();
    assert_eq!(failed, ["t05", "t10"]);
    assert_eq!(store.records.len(), 10);
}

#[test]
fn config_errors_exit_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = motionskill(&["-c", "/nonexistent/c.toml", "synth"], &out);
    assert_eq!(o.status.code(), Some(i32::from(CliError::CONFIG)));
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[codebook]\nk_grid = [11]\n").unwrap();
    let o = motionskill(&["-c", cfg.to_str().unwrap(), "synth"], &out);
    assert_eq!(o.status.code(), Some(i32::from(CliError::CONFIG)));
    let o = motionskill(&["evaluate"], &out);
    assert_eq!(o.status.code(), Some(i32::from(CliError::CONFIG)), "no feature store yet");
}

#[test]
fn synth_writes_documented_headers_and_check_sets_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "[synth]\nsnr_grid = [1.0, 10.0]\nreps = 2\nlength = 256\nphase_points = 3\n").unwrap();
    let c = cfg.to_str().unwrap();
    let out = tmp.path().join("out");
    let plain = motionskill(&["-c", c, "synth"], &out);
    assert!(plain.status.success());
    let snr = std::fs::read_to_string(out.join("synth/snr_curve.csv")).unwrap();
    let phase = std::fs::read_to_string(out.join("synth/phase_curve.csv")).unwrap();
    assert_eq!(
        motionskill_cli::output::csv_body(&snr).lines().next(),
        Some("snr,radius,mean_apen,std_apen,reps")
    );
    assert_eq!(
        motionskill_cli::output::csv_body(&phase).lines().next(),
        Some("phase,phase_over_pi,mean_xapen,std_xapen,reps")
    );
    let checked = motionskill(&["-c", c, "synth", "--check"], &out);
    let stdout = String::from_utf8_lossy(&checked.stdout);
    let expected = if stdout.contains("FAIL") { CliError::CHECK } else { CliError::OK };
    assert_eq!(checked.status.code(), Some(i32::from(expected)));
}

#[test]
fn env_var_sets_default_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "[synth]\nsnr_grid = [1.0, 10.0]\nreps = 1\nlength = 128\nphase_points = 2\n").unwrap();
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_motionskill"))
        .args(["-c", cfg.to_str().unwrap(), "synth"])
        .env("MOTIONSKILL_OUT", tmp.path().join("env-out"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("env-out/synth/snr_curve.csv").is_file());
}
