use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use prandtl_lab::config::RunConfig;

const SMALL: &str = r#"
[grid]
y_max = 8.0
ny = 401
t0 = 0.1
nt = 11

[mode]
n = [64, 128]
t_samples = 3

[growth]
k = [16, 32]
spectrum_nodes = 0

[probe]
k = [16, 32]
t = 0.05
snapshots = [0.05]
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.toml");
    fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prandtl-lab")).args(args).output().unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    let err = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(err.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {err}"))
}

#[test]
fn eigen_writes_artifacts_and_manifest() {
    let dir = scratch("eigen");
    let out = dir.join("out");
    let o = run(&["eigen", "--out", out.to_str().unwrap(), "--threads", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "eigen");
    assert_eq!(manifest["config_hash"], RunConfig::default().hash());
    let names: Vec<&str> = manifest["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap()).collect();
    for want in ["eigen/eigenpair.json", "eigen/profile.csv", "eigen/profile.svg", "checks.json"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    let pair: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("eigen/eigenpair.json")).unwrap()).unwrap();
    assert!(pair["tau_im"].as_f64().unwrap() < 0.0);
    assert_eq!(pair["z_grid"].as_array().unwrap().len(), pair["V_re"].as_array().unwrap().len());
}

#[test]
fn identical_config_gives_identical_artifacts() {
    let dir = scratch("determinism");
    let cfg = write_config(&dir, SMALL);
    let (a, b) = (dir.join("a"), dir.join("b"));
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let o = run(&["mode", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads]);
        // the coarse grid may fail the divergence tolerance; only the artifacts matter here
        assert!(matches!(o.status.code(), Some(0 | 4)), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let manifest = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert_eq!(manifest, fs::read_to_string(b.join("manifest.json")).unwrap());
    let parsed: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    for art in parsed["artifacts"].as_array().unwrap() {
        let p = art["path"].as_str().unwrap();
        assert_eq!(fs::read(a.join(p)).unwrap(), fs::read(b.join(p)).unwrap(), "{p}");
    }
}

#[test]
fn seed_changes_the_config_hash() {
    let dir = scratch("seed");
    let out = dir.join("out");
    let o = run(&["eigen", "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let cfg = RunConfig { seed: 7, ..RunConfig::default() };
    assert_eq!(manifest["config_hash"], cfg.hash());
    assert_ne!(manifest["config_hash"], RunConfig::default().hash());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = scratch("config_errors");
    let out = dir.join("out");
    let o = run(&["heat", "--config", dir.join("missing.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["kind"], "InvalidParameter");

    let bad = write_config(&dir, "[grid]\nnyy = 3\n");
    let o = run(&["heat", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let fam = write_config(&dir, "[[profiles]]\nfamily = \"blasius\"\n");
    let o = run(&["heat", "--config", fam.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let j = error_json(&o);
    assert_eq!(j["error"]["kind"], "UnknownFamily");
    assert_eq!(j["exit_code"], 2);

    let o = run(&["heat", "--threads", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["kind"], "Usage");
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = scratch("numerical");
    // the amplitude-1 bump loses its critical point before t = 0.25
    let cfg = write_config(&dir, "[[profiles]]\nfamily = \"gaussian-bump\"\nparams = { amp = 1.0 }\n\n[grid]\nny = 401\n");
    let o = run(&["heat", "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["error"]["kind"], "CurvatureVanished");
}

#[test]
fn failing_check_exits_with_four() {
    let dir = scratch("acceptance");
    let cfg = write_config(&dir, &SMALL.replace("t_samples = 3", "t_samples = 3\nplateau_tol = 1e-9"));
    let out = dir.join("out");
    let o = run(&["residual-scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL residual plateau")));
    assert!(out.join("manifest.json").exists());
}
