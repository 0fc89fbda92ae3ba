use std::path::Path;
use std::process::{Command, Output};

fn nohair(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_nohair"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .env("NO_COLOR", "1")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn verify_is_deterministic_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"seed": 42, "models": 10, "dim_f": [2], "dim_bh": [2]}"#;
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let oa = nohair(dir.path(), &["verify", "--quiet", "--workers", "1", "--out", a.to_str().unwrap()], cfg);
    let ob = nohair(dir.path(), &["verify", "--quiet", "--workers", "3", "--out", b.to_str().unwrap()], cfg);
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(code(&ob), 0);
    let ra = std::fs::read(a.join("results.csv")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("results.csv")).unwrap());
    assert_eq!(String::from_utf8(ra).unwrap().lines().count(), 11);
    for f in ["manifest.json", "frontier.dat", "frontier.svg"] {
        assert!(a.join(f).exists(), "{f} missing");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["stream_ids"].as_array().unwrap().len(), 10);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"seed": 1, "models": 2, "dim_f": [2], "dim_bh": [2]}"#;
    let out = dir.path().join("o");
    let o = nohair(dir.path(), &["verify", "--quiet", "--seed", "9", "--out", out.to_str().unwrap()], cfg);
    assert_eq!(code(&o), 0);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
}

#[test]
fn ideal_preset_passes_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = nohair(dir.path(), &["verify", "--out", out.to_str().unwrap()], r#"{"preset": "ideal", "models": 10}"#);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().skip(1).filter(|l| l.contains(",pass,")).count(), 10);
    assert!(String::from_utf8_lossy(&o.stderr).contains("10 pass"));
}

#[test]
fn diamond_of_identical_channels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"a": {"kind": "identity", "dim": 2}, "b": {"kind": "identity", "dim": 2}}"#;
    let o = nohair(dir.path(), &["diamond", "--quiet", "--out", dir.path().join("o").to_str().unwrap()], cfg);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["lower"].as_f64().unwrap().abs() <= 1e-12);
    assert!(v["upper"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["certified"], true);
}

#[test]
fn diamond_of_depolarizing_against_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"a": {"kind": "family", "family": "depolarizing", "dim": 2, "param": 0.5},
                  "b": {"kind": "kraus", "operators": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}}"#;
    let out = dir.path().join("o");
    let o = nohair(dir.path(), &["diamond", "--quiet", "--out", out.to_str().unwrap()], cfg);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["lower"].as_f64().unwrap() - 0.375).abs() <= 1e-6);
    assert!((v["upper"].as_f64().unwrap() - 0.375).abs() <= 1e-6);
    assert!(out.join("diamond.json").exists());
}

#[test]
fn malformed_kraus_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = r#"{"a": {"kind": "kraus", "operators": [[[[1, 0]], [[0, 0], [1, 0]]]]},
                     "b": {"kind": "identity", "dim": 2}}"#;
    assert_eq!(code(&nohair(dir.path(), &["diamond"], ragged)), 2);
    let not_tp = r#"{"a": {"kind": "kraus", "operators": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]},
                     "b": {"kind": "identity", "dim": 2}}"#;
    assert_eq!(code(&nohair(dir.path(), &["diamond"], not_tp)), 2);
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(code(&nohair(dir.path(), &["entangle", "--out", o], r#"{"spectra": []}"#)), 2);
    assert_eq!(code(&nohair(dir.path(), &["verify", "--out", o], r#"{"models": 1, "colour": true}"#)), 2);
    assert_eq!(code(&nohair(dir.path(), &["verify", "--out", o], r#"{"models": 0}"#)), 2);
    assert_eq!(code(&nohair(dir.path(), &["verify", "--out", o], "not json")), 2);
    assert_eq!(code(&nohair(dir.path(), &["sweep", "--out", o], r#"{"family": "dephasing", "params": [1.5]}"#)), 2);
    assert!(!out.exists());
}

#[test]
fn sweep_with_too_few_points_refuses_the_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = r#"{"family": "dephasing", "params": [0.0, 0.01, 0.05, 0.1]}"#;
    let o = nohair(dir.path(), &["sweep", "--out", out.to_str().unwrap()], cfg);
    assert_eq!(code(&o), 3);
    assert!(out.join("results.csv").exists());
    assert!(!out.join("fit.json").exists());
}

#[test]
fn sweep_writes_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = r#"{"family": "dephasing", "params": [0.001, 0.003, 0.01, 0.03, 0.1]}"#;
    let o = nohair(dir.path(), &["sweep", "--quiet", "--out", out.to_str().unwrap()], cfg);
    assert_eq!(code(&o), 0);
    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["points_used"], 5);
    assert!(fit["slope"].as_f64().unwrap().is_finite());
}

#[test]
fn entangle_writes_rows_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = r#"{"instances": 3, "dim_f": [2], "dim_bh": [2], "spectra": [[1.0, 0.0], [0.5, 0.5], [0.9, 0.1]], "pivot_samples": 8}"#;
    let o = nohair(dir.path(), &["entangle", "--quiet", "--out", out.to_str().unwrap()], cfg);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
}

#[test]
fn output_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let from_cfg = dir.path().join("cfg_out");
    let cfg = format!(r#"{{"models": 1, "dim_f": [2], "dim_bh": [2], "output_dir": {:?}}}"#, from_cfg.to_str().unwrap());
    assert_eq!(code(&nohair(dir.path(), &["verify", "--quiet"], &cfg)), 0);
    assert!(from_cfg.join("results.csv").exists());
    let flag = dir.path().join("flag_out");
    assert_eq!(code(&nohair(dir.path(), &["verify", "--quiet", "--out", flag.to_str().unwrap()], &cfg)), 0);
    assert!(flag.join("results.csv").exists());
}
