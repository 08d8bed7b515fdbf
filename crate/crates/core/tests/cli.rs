use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn votewave(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_votewave"))
        .args(args)
        .env("VOTEWAVE_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

/// Runs the standard set of subcommands into `dir`.
fn run_all(dir: &Path, threads: &str) {
    let cfg = configs();
    let s = |p: PathBuf| p.to_string_lossy().into_owned();
    let runs: Vec<Vec<String>> = vec![
        vec!["figure1".into(), "--out-dir".into(), s(dir.join("fig")), "--n".into(), "200".into()],
        vec![
            "simulate".into(), "--config".into(), s(cfg.join("fig1b.json")), "--depth".into(), "4".into(),
            "--replicas".into(), "3000".into(), "--out".into(), s(dir.join("sim/samples.csv")),
        ],
        vec![
            "iterate".into(), "--config".into(), s(cfg.join("fig1c.json")), "--n".into(), "60".into(),
            "--record-every".into(), "20".into(), "--out-dir".into(), s(dir.join("iter")),
        ],
        vec!["wave".into(), "--config".into(), s(cfg.join("bistable_density.json")), "--out".into(), s(dir.join("wave/profile.csv"))],
    ];
    for args in runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = votewave(&args, threads);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    run_all(dirs[0].path(), "1");
    run_all(dirs[1].path(), "8");
    run_all(dirs[2].path(), "1");
    for sub in ["fig", "sim", "iter", "wave"] {
        let reference = csv_files(&dirs[0].path().join(sub));
        assert!(!reference.is_empty());
        for other in &dirs[1..] {
            assert_eq!(reference, csv_files(&other.path().join(sub)), "{sub}");
        }
        assert!(dirs[0].path().join(sub).join("manifest.json").exists());
    }
    let names: Vec<String> = csv_files(&dirs[0].path().join("fig")).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["fig1a.csv", "fig1b.csv", "fig1c.csv"]);
}

#[test]
fn exit_codes() {
    let out = votewave(&["no-such-command"], "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let dir = tempfile::tempdir().unwrap();
    let bad = configs().join("bad.json");
    let target = dir.path().join("x.csv");
    let out = votewave(&["simulate", "--config", bad.to_str().unwrap(), "--out", target.to_str().unwrap()], "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zeta rows must sum to 1"));

    let wave_cfg = configs().join("bistable_density.json");
    let out = votewave(
        &["wave", "--config", wave_cfg.to_str().unwrap(), "--max-iters", "2", "--out", target.to_str().unwrap()],
        "1",
    );
    assert_eq!(out.status.code(), Some(3));

    assert_eq!(votewave(&["--help"], "1").status.code(), Some(0));
}

#[test]
fn represent_prints_threshold_model() {
    let out = votewave(&["represent", "--poly", configs().join("g_a.json").to_str().unwrap()], "1");
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"threshold":{"d":3,"zeta":{"2,3":1.0}}}"#);
}

#[test]
fn manifest_records_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig1a.json");
    let out = votewave(
        &["--seed", "42", "simulate", "--config", cfg.to_str().unwrap(), "--depth", "3", "--replicas", "100",
          "--out", dir.path().join("s.csv").to_str().unwrap()],
        "1",
    );
    assert!(out.status.success());
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["tool"], "votewave");
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["config"]["depth"], 3);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"][0], "s.csv");
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("replica,value\n") && !csv.contains('\r'));
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn diagnose_flags_figure_one_archetypes() {
    let run = |name: &str| -> serde_json::Value {
        let cfg = configs().join(name);
        let out = votewave(&["diagnose", "--config", cfg.to_str().unwrap(), "--n-list", "250,500,1000"], "1");
        assert!(out.status.success());
        serde_json::from_slice(&out.stdout).unwrap()
    };
    let a = run("fig1a.json");
    assert!(a["clusters"]["summary"].as_array().unwrap().iter().all(|c| c["tight"] == true && c["bounded"] == true));
    let c = run("fig1c.json");
    assert!(c["clusters"]["summary"].as_array().unwrap().iter().all(|c| c["bounded"] == false));
}
