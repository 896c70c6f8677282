//! End-to-end tests of the `vortex` binary: exit codes, artifact layout,
//! determinism of the written files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn vortex() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vortex"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vortex-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SELF_SIMILAR: &str = r#"{
    "schema_version": 1,
    "field": {"type": "plane", "alpha": 1.0},
    "initial": {"type": "self_similar", "alpha": 1.0},
    "run_to_collapse": true,
    "samples": 300,
    "analysis": {"holder": true, "clusters": true, "invariants": true}
}"#;

const TRANSLATING_PAIR: &str = r#"{
    "schema_version": 1,
    "field": {"type": "plane", "alpha": 1.0},
    "initial": {"type": "explicit",
                "positions": [[0.0, 0.0], [1.0, 0.0]],
                "intensities": [1.0, -1.0]},
    "t_final": 1.0,
    "samples": 100,
    "analysis": {"invariants": true}
}"#;

#[test]
fn run_self_similar_scenario() {
    let dir = temp_dir("selfsim");
    let scenario = write_scenario(&dir, "scenario.json", SELF_SIMILAR);
    let out = dir.join("out");
    let status = vortex()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["termination"], "collapsed");
    let t_c = summary["t_c"].as_f64().unwrap();
    let predicted = summary["predicted_collapse_time"].as_f64().unwrap();
    assert!((t_c - predicted).abs() / predicted <= 1e-3);
    assert_eq!(
        summary["self_similar"]["vanishing_condition"],
        "one_minus_alpha"
    );
    let holder = summary["holder"].as_array().unwrap();
    let beta = holder[0]["exponent"].as_f64().unwrap();
    assert!((beta - 0.5).abs() <= 0.01, "beta = {beta}");
    assert_eq!(summary["clusters"]["parts"][0].as_array().unwrap().len(), 3);

    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x1,y1,x2,y2,x3,y3,H,Mx,My,I,L,dmin\n"));
}

#[test]
fn malformed_scenario_exits_2_without_outputs() {
    let dir = temp_dir("malformed");
    let scenario = write_scenario(
        &dir,
        "bad.json",
        r#"{"schema_version": 1, "field": {"type": "plane", "alpha": 1.0}, "unexpected": 3}"#,
    );
    let out = dir.join("out");
    let output = vortex()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!out.exists(), "no partial outputs on schema failure");
}

#[test]
fn translating_pair_reaches_final_time_with_tiny_drift() {
    let dir = temp_dir("pair");
    let scenario = write_scenario(&dir, "pair.json", TRANSLATING_PAIR);
    let out = dir.join("out");
    let status = vortex()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["termination"], "reached_final_time");
    assert!(summary["t_c"].is_null());
    for field in ["hamiltonian", "vorticity_x", "vorticity_y", "momentum"] {
        let drift = summary["drift"][field].as_f64().unwrap();
        assert!(drift <= 1e-9, "{field} drift = {drift}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = temp_dir("determinism");
    let scenario = write_scenario(&dir, "scenario.json", SELF_SIMILAR);
    let (out_a, out_b) = (dir.join("a"), dir.join("b"));
    for out in [&out_a, &out_b] {
        let status = vortex()
            .args([
                "run",
                scenario.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    for file in ["trajectory.csv", "summary.json"] {
        let a = fs::read(out_a.join(file)).unwrap();
        let b = fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn holder_without_collapse_exits_4() {
    let dir = temp_dir("precondition");
    let body = TRANSLATING_PAIR.replace(
        r#""analysis": {"invariants": true}"#,
        r#""analysis": {"holder": true}"#,
    );
    let scenario = write_scenario(&dir, "pair.json", &body);
    let out = dir.join("out");
    let output = vortex()
        .args([
            "run",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn sweep_aggregates_exponents() {
    let dir = temp_dir("sweep");
    let template = write_scenario(&dir, "template.json", SELF_SIMILAR);
    let out = dir.join("out");
    let output = vortex()
        .args([
            "sweep",
            "--alphas",
            "0.5,1,1",
            "--template",
            template.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("alpha,exponent,expected,relative_error,t_c,predicted_t_c,status\n"));
    assert_eq!(csv.lines().count(), 4);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("sweep_summary.json")).unwrap()).unwrap();
    let rows = summary["rows"].as_array().unwrap();
    for row in rows {
        assert_eq!(row["status"], "ok");
        let rel = row["relative_error"].as_f64().unwrap();
        assert!(rel <= 0.02, "row {row}: relative error {rel}");
    }
    // Duplicate exponents give identical results (determinism).
    assert_eq!(rows[1]["t_c"], rows[2]["t_c"]);
    assert_eq!(rows[1]["exponent"], rows[2]["exponent"]);
}

#[test]
fn sweep_with_empty_alpha_list_is_usage_error() {
    let dir = temp_dir("sweep-empty");
    let template = write_scenario(&dir, "template.json", SELF_SIMILAR);
    let output = vortex()
        .args([
            "sweep",
            "--alphas",
            "",
            "--template",
            template.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
