use std::fs;
use std::path::PathBuf;

use simpose::{execute, JobConfig, Task};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn shipped_configs_validate() {
    let mut n = 0;
    for entry in fs::read_dir(repo().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            JobConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn schema_is_valid_json() {
    let text = fs::read_to_string(repo().join("docs/config.schema.json")).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    let tasks = schema["properties"]["task"]["enum"].as_array().unwrap();
    assert_eq!(tasks.len(), 7);
}

#[test]
fn tetrahedron_seed_gives_regular_tetrahedron() {
    let cfg = JobConfig::load(&repo().join("configs/find_tetrahedron.json")).unwrap();
    assert_eq!(cfg.task, Task::Find);
    let (report, _) = execute(&cfg).unwrap();
    let edges: Vec<f64> =
        report.result["edge_lengths"].as_array().unwrap().iter().map(|e| e.as_f64().unwrap()).collect();
    assert_eq!(edges.len(), 6);
    let mean = edges.iter().sum::<f64>() / 6.0;
    assert!(edges.iter().all(|e| (e - mean).abs() < 1e-8 * mean));
    assert_eq!(report.result["coordinates"].as_array().unwrap().len(), 4);
}

#[test]
fn perturbation_hint_parses() {
    let cfg = JobConfig::from_json(
        r#"{"task": "find", "simplex": {"points": [[1,1,1],[1,-1,-1],[-1,1,-1],[-1,-1,1]]},
            "embedding": {"family": "expr", "k": 3,
                          "expr": "1 + 0.1*cos(phi)^2 + 0.001*sin(phi)^2*sin(2*theta + 0.7)"}}"#,
    )
    .unwrap();
    assert!(execute(&cfg).is_ok());
}
