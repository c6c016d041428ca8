//! End-to-end tests of the `pc` binary: exit-code contract, field-naming
//! validation messages, and config round-trips through the embedded
//! `# config` CSV line.

use std::path::Path;
use std::process::{Command, Output};

fn pc(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pc"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("PC_THREADS", "2")
        .output()
        .unwrap()
}

#[test]
fn eval_succeeds_and_embeds_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "experiment": "eval",
            "body": {"shape": "ball", "dim": 2, "center": [0.0, 0.0], "radius": 1.0},
            "kernel": {"variant": "poisson", "h": 0.5},
            "point": [0.1, 0.2]
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = pc(&["eval"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("eval.csv")).unwrap();
    assert!(csv.starts_with("# config {"));
    assert!(!csv.contains('\r'));
    assert!(out.join("summary.json").exists());
}

#[test]
fn malformed_cone_aperture_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "body": {"shape": "ball", "dim": 2, "center": [0.0, 0.0], "radius": 1.0,
                     "cone": {"kappa": 6.283185307179586, "delta": 1.0}},
            "kernel": {"variant": "poisson", "h": 0.5},
            "point": [0.0, 0.0]
        }"#,
    )
    .unwrap();
    let res = pc(&["eval"], &cfg, &dir.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("ConeSpec.kappa"), "stderr: {stderr}");
}

#[test]
fn boundary_point_renormalized_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "body": {"shape": "ball", "dim": 2, "center": [0.0, 0.0], "radius": 1.0},
            "kernel": {"variant": "renormalized", "alpha": -1.0},
            "point": [1.0, 0.0]
        }"#,
    )
    .unwrap();
    let res = pc(&["eval"], &cfg, &dir.path().join("out"));
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn mismatched_experiment_name_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "experiment": "eval",
            "body": {"shape": "ball", "dim": 2, "center": [0.0, 0.0], "radius": 1.0}
        }"#,
    )
    .unwrap();
    let res = pc(&["unfolded"], &cfg, &dir.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn invalid_pc_threads_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{}").unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_pc"))
        .args(["eval", "--config"])
        .arg(&cfg)
        .env("PC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("PC_THREADS"));
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let res = pc(&["eval"], &dir.path().join("nope.json"), &dir.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn embedded_config_reruns_to_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "experiment": "unfolded",
            "body": {"shape": "polygon",
                     "vertices": [[0.0, 0.0], [4.0, 0.0], [1.0, 1.0]]},
            "direction_count": 16
        }"#,
    )
    .unwrap();
    let out1 = dir.path().join("out1");
    let res = pc(&["unfolded"], &cfg, &out1);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv1 = std::fs::read_to_string(out1.join("unfolded.csv")).unwrap();

    // extract the embedded config and run again from it
    let embedded = csv1
        .lines()
        .next()
        .unwrap()
        .strip_prefix("# config ")
        .unwrap();
    let cfg2 = dir.path().join("cfg2.json");
    std::fs::write(&cfg2, embedded).unwrap();
    let out2 = dir.path().join("out2");
    let res = pc(&["unfolded"], &cfg2, &out2);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv2 = std::fs::read_to_string(out2.join("unfolded.csv")).unwrap();
    assert_eq!(csv1, csv2);
}

#[test]
fn conebound_reports_the_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "experiment": "conebound",
            "conebound": {"alpha": -1.0, "kappa": 3.141592653589793,
                          "delta": "inf", "d": 6.0, "r0": 1.0, "m": 2,
                          "samples": 12}
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = pc(&["conebound"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let rt = summary["results"]["r_tilde"].as_f64().unwrap();
    let lb = summary["results"]["lower_bound"].as_f64().unwrap();
    assert!(rt > lb && rt < 1.0, "r_tilde {rt}, lower bound {lb}");
}

#[test]
fn svg_flag_writes_a_figure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "body": {"shape": "ball", "dim": 2, "center": [0.0, 0.0], "radius": 1.0},
            "direction_count": 16
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = Command::new(env!("CARGO_BIN_EXE_pc"))
        .args(["unfolded", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("--svg")
        .env("PC_THREADS", "2")
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let svg = std::fs::read_to_string(out.join("figure.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}
