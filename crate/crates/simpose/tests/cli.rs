use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn simpose(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("job.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_simpose"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir)
        .args(extra)
        .output()
        .unwrap()
}

fn report(dir: &Path, stem: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json"))).unwrap()).unwrap()
}

const TREFOIL: &str = r#"{
    "task": "degree",
    "simplex": {"points": [[0, 0], [1, 0], [0.5, 0.8660254037844386]]},
    "embedding": {"family": "expr", "k": 2, "expr": "1 + 0.3*sin(3*theta)"},
    "solver": {"pose_samples": 4}
}"#;

#[test]
fn cm_prints_volume() {
    let dir = TempDir::new().unwrap();
    let out = simpose(dir.path(), r#"{"task": "cm", "simplex": {"distances": [1, 1, 1]}}"#, &[]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"volume\": 0.4330127"));
    let r = report(dir.path(), "cm");
    assert!((r["result"]["volume"].as_f64().unwrap() - 0.43301270).abs() < 1e-8);
    assert!((r["result"]["cm_det"].as_f64().unwrap() + 3.0).abs() < 1e-12);
    assert_eq!(r["result"]["constructible"], Value::Bool(true));
}

#[test]
fn cm_reports_failing_subsets() {
    let dir = TempDir::new().unwrap();
    let out = simpose(dir.path(), r#"{"task": "cm", "simplex": {"distances": [1, 1, 3]}}"#, &["--quiet"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r = report(dir.path(), "cm");
    assert_eq!(r["result"]["constructible"], Value::Bool(false));
    assert_eq!(r["result"]["failed_subsets"], serde_json::json!([[0, 1, 2]]));
}

#[test]
fn schema_violations_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = simpose(dir.path(), r#"{"task": "cm", "simplex": {"distances": [1, 1, 1]}, "extra": 1}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = simpose(dir.path(), r#"{"task": "fly"}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = simpose(
        dir.path(),
        r#"{"task": "degree", "simplex": {"points": [[0,0,0],[1,0,0],[0,1,0],[0,0,1]]},
            "embedding": {"family": "round", "k": 3}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("degree.json").exists());
}

#[test]
fn solver_failure_exits_1_with_report() {
    let dir = TempDir::new().unwrap();
    let out = simpose(
        dir.path(),
        r#"{"task": "sweep", "simplex": {"distances": [3, 4, 5]},
            "embedding": {"family": "ellipse", "a": 1.5, "b": 1},
            "solver": {"newton": {"max_iter": 0}, "homotopy_steps": 1, "dt_min": 0.5}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path(), "sweep");
    assert_eq!(r["status"], "failed");
    assert!(!r["error"].as_str().unwrap().is_empty());
}

#[test]
fn degree_of_trefoil_is_one_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let out = simpose(dir.path(), TREFOIL, &["--seed", "11"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = fs::read(dir.path().join("degree.json")).unwrap();
    let r: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(r["seed"], 11);
    assert_eq!(r["result"]["degree_sum"], 1);
    let csv = fs::read_to_string(dir.path().join("degree.csv")).unwrap();
    assert!(csv.starts_with("loop,s,x0,y0,x1,y1,x2,y2\n"));

    simpose(dir.path(), TREFOIL, &["--seed", "11"]);
    assert_eq!(first, fs::read(dir.path().join("degree.json")).unwrap());
}

#[test]
fn render_reads_only_the_report() {
    let dir = TempDir::new().unwrap();
    assert!(simpose(dir.path(), TREFOIL, &[]).status.success());
    let source = dir.path().join("degree.json");
    let cfg = format!(
        r#"{{"task": "render", "report": {}, "output": {{"name": "loop", "frames": 9}}}}"#,
        serde_json::to_string(&source).unwrap()
    );
    let out = simpose(dir.path(), &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = fs::read_to_string(dir.path().join("loop.svg")).unwrap();
    assert_eq!(svg.matches("<polygon").count(), 10);

    let cfg = format!(r#"{{"task": "render", "report": {}}}"#, serde_json::to_string(&source).unwrap());
    let clash = cfg.replace("}", r#", "output": {"name": "degree"}}"#);
    assert_eq!(simpose(dir.path(), &clash, &[]).status.code(), Some(2));
}

#[test]
fn check_jacobian_flag_records_discrepancy() {
    let dir = TempDir::new().unwrap();
    let out = simpose(
        dir.path(),
        r#"{"task": "find", "simplex": {"distances": [3, 4, 5]},
            "embedding": {"family": "ellipse", "a": 1.2, "b": 1}, "pose": {"angle": 0.3}}"#,
        &["--check-jacobian"],
    );
    assert!(out.status.success());
    let r = report(dir.path(), "find");
    assert!(r["result"]["solution"]["jacobian_check"].as_f64().unwrap() < 1e-5);
    assert!(r["result"]["edge_lengths"].as_array().unwrap().len() == 3);
}

#[test]
fn trace_writes_windings() {
    let dir = TempDir::new().unwrap();
    let out = simpose(
        dir.path(),
        r#"{"task": "trace", "simplex": {"points": [[0, 0], [3, 0], [0, 4]]},
            "embedding": {"family": "ellipse", "a": 1.2, "b": 1}}"#,
        &[],
    );
    assert!(out.status.success());
    let r = report(dir.path(), "trace");
    assert_eq!(r["result"]["closed"], true);
    assert_eq!(r["result"]["pose_winding"], 1);
}
