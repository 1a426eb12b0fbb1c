//! End-to-end behavior of the `prlab` binary: exit codes, artifact
//! byte-reproducibility, and config sidecars.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prlab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prlab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

#[test]
fn emd_identical_sets_cost_zero() {
    let dir = scratch("emd");
    let a = dir.join("a.csv");
    write(&a, "x,y\n0,0\n1,0\n0,1\n");
    let out = bin()
        .args(["emd"])
        .arg(&a)
        .arg(&a)
        .args(["--ground", "l1", "--p", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["cost"].as_f64().unwrap(), 0.0);
    assert_eq!(json["exact"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_2() {
    let dir = scratch("usage");
    // Unknown subcommand -> clap usage error (2).
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Malformed config file -> 2.
    let cfg = dir.join("bad.json");
    write(&cfg, "{not json");
    let a = dir.join("a.csv");
    write(&a, "0,0\n1,1\n");
    let out = bin()
        .arg("emd")
        .arg(&a)
        .arg(&a)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Missing input file -> 2.
    let out = bin()
        .arg("emd")
        .arg(dir.join("nope.csv"))
        .arg(&a)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invertible_oracle_model_fails_with_exit_1() {
    let dir = scratch("oracle-fail");
    let model = dir.join("diag.json");
    write(
        &model,
        r#"{"x_vals": [0.0, 1.0], "y_vals": [0.0, 1.0], "pmf": [[0.5, 0.0], [0.0, 0.5]]}"#,
    );
    let out = bin()
        .args(["oracle", "--model"])
        .arg(&model)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn artifacts_are_byte_reproducible_with_sidecars() {
    let dir1 = scratch("repro1");
    let dir2 = scratch("repro2");
    for dir in [&dir1, &dir2] {
        let status = bin()
            .args([
                "sweep", "--family", "zigzag", "--deltas", "0.5,0.25", "--n-metric", "200",
                "--n-probe", "100", "--seeds", "0,1", "--threads", "2",
            ])
            .arg("--out-dir")
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["sweep.csv", "sweep.svg", "sweep.csv.config.json"] {
        let a = std::fs::read(dir1.join(name)).unwrap();
        let b = std::fs::read(dir2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // The sidecar records the resolved config.
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir1.join("sweep.csv.config.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["command"], "sweep");
    assert_eq!(sidecar["n_metric"], 200);
    std::fs::remove_dir_all(&dir1).ok();
    std::fs::remove_dir_all(&dir2).ok();
}

#[test]
fn train_writes_history_and_estimator() {
    let dir = scratch("train");
    let status = bin()
        .args([
            "train", "--steps", "60", "--n-train", "300", "--batch", "8", "--lambda", "0.5",
        ])
        .arg("--out-dir")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let history = std::fs::read_to_string(dir.join("history.csv")).unwrap();
    assert!(history.starts_with("step,d_loss,g_loss,r1,lr,robustness_loss\n"));
    assert_eq!(history.lines().count(), 61);

    // The saved estimator round-trips through kbar and fps.
    let est = dir.join("estimator.json");
    let out = bin()
        .args(["kbar", "--estimator"])
        .arg(&est)
        .args(["--method", "random", "--n", "50"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(json["kbar"].as_f64().unwrap() >= 0.0);

    let fps_out = dir.join("fps.csv");
    let status = bin()
        .args(["fps", "--estimator"])
        .arg(&est)
        .args(["--y", "0.3", "--samples", "3", "--t", "5", "--alpha", "0.1"])
        .arg("--output")
        .arg(&fps_out)
        .status()
        .unwrap();
    assert!(status.success());
    let fps = std::fs::read_to_string(&fps_out).unwrap();
    assert!(fps.starts_with("sample_index,y_adv,output\n"));
    assert_eq!(fps.lines().count(), 4);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = scratch("config");
    let a = dir.join("a.csv");
    write(&a, "0.0\n2.0\n");
    let b = dir.join("b.csv");
    write(&b, "1.0\n3.0\n");
    let cfg = dir.join("cfg.json");
    write(&cfg, r#"{"ground": "l2", "p": 2}"#);

    // Config file alone: L2^2 cost of matching shifted points = 1 each.
    let out = bin()
        .arg("emd")
        .arg(&a)
        .arg(&b)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(json["p"], 2);
    assert!((json["cost"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    // Explicit flag overrides the file.
    let out = bin()
        .arg("emd")
        .arg(&a)
        .arg(&b)
        .arg("--config")
        .arg(&cfg)
        .args(["--p", "1"])
        .output()
        .unwrap();
    let json: serde_json::Value = serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(json["p"], 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn diag_reports_reference_estimator() {
    let dir = scratch("diag");
    let est = dir.join("mmse.json");
    write(&est, r#"{"variant": "mmse", "sigma_n": 1.0}"#);
    let out = bin()
        .args(["diag", "--estimator"])
        .arg(&est)
        .args(["--n", "2000"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    // A linear deterministic estimator has residual correlation exactly 1.
    assert!((json["pearson_corr"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    std::fs::remove_dir_all(&dir).ok();
}
