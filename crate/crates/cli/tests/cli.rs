//! End-to-end runs of the binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_curl-lambda");

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("curl-lambda-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CURL_LAMBDA_THREADS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
    "domain": {"type": "ball", "radius": 1.0, "n": 12},
    "lambda": {"re": 2.0, "im": 0.0},
    "source": {"builtin": "smooth"},
    "eval": {"n": 12, "margin": 2},
    "output": {"csv": "w.csv", "vtk": "w.vtk"}
}"#;

#[test]
fn solve_curl_writes_one_row_per_eval_point() {
    let d = scratch("rows");
    let cfg = write_config(&d, SMALL);
    let o = run(&["solve-curl", "--config", &cfg], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(d.join("w.csv")).unwrap().lines().count() - 1;
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("w.report.json")).unwrap()).unwrap();
    assert_eq!(report["results"]["eval_points"].as_u64().unwrap() as usize, rows);
    assert!(rows > 0);
    assert!(report["timings"]["total_s"].is_number());
    assert!(std::fs::read_to_string(d.join("w.vtk")).unwrap().contains("STRUCTURED_POINTS"));
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn zero_lambda_exits_3() {
    let d = scratch("zero");
    let cfg = write_config(&d, &SMALL.replace("\"re\": 2.0", "\"re\": 0.0"));
    let o = run(&["solve-curl", "--config", &cfg], &d);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda must be nonzero"));
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn schema_violations_exit_2() {
    let d = scratch("schema");
    for bad in [
        SMALL.replace("\"margin\": 2}", "\"margin\": 2, \"spacing\": 0.1}"),
        SMALL.replace("\"builtin\": \"smooth\"", "\"builtin\": \"nope\""),
        SMALL.replace("\"lambda\": {\"re\": 2.0, \"im\": 0.0},", ""),
        "{".to_string(),
    ] {
        let cfg = write_config(&d, &bad);
        let o = run(&["solve-curl", "--config", &cfg], &d);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    let o = run(&["solve-curl", "--config", "/nonexistent.json"], &d);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn unknown_suite_exits_2() {
    let d = scratch("suite");
    let o = run(&["verify", "--suite", "nope"], &d);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify", "--suite", "fielddiff", "--preset", "huge"], &d);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn verify_fielddiff_passes_and_reports() {
    let d = scratch("verify");
    let o = run(&["verify", "--suite", "fielddiff", "--report", "r.json"], &d);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.contains("fielddiff.curl_grad")));
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 4);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], r["total"]);
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn repeated_solves_are_byte_identical() {
    let d = scratch("repeat");
    let cfg = write_config(&d, SMALL);
    let mut outs = Vec::new();
    for threads in ["1", "2"] {
        let sub = d.join(threads);
        let o = Command::new(BIN)
            .args(["solve-curl", "--config", &cfg, "--out"])
            .arg(&sub)
            .env("CURL_LAMBDA_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        outs.push(std::fs::read(sub.join("w.csv")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn conjugate_and_maxwell_commands_run() {
    let d = scratch("others");
    let conj = SMALL
        .replace("{\"builtin\": \"smooth\"}", "{\"builtin\": \"plane-wave\", \"params\": {\"k\": [0, 0, 1]}}")
        .replace("\"n\": 12, \"margin\": 2", "\"n\": 16, \"margin\": 1");
    let cfg = write_config(&d, &conj);
    let o = run(&["conjugate", "--direction", "from-scalar", "--config", &cfg], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["conjugate", "--direction", "from-vector", "--config", &cfg], &d);
    assert_eq!(o.status.code(), Some(2), "a scalar source for from-vector is a schema error");

    let mx = SMALL
        .replace("\"n\": 12}", "\"n\": 16}")
        .replace("\"n\": 12, \"margin\": 2", "\"n\": 16, \"margin\": 2")
        .replace("{\"builtin\": \"smooth\"}", "{\"builtin\": \"bump\"}")
        .replace(
            "\"output\"",
            "\"medium\": {\"omega\": 1.0, \"eps\": [1, 0], \"mu\": [4, 0]},\n    \"output\"",
        );
    let cfg = write_config(&d, &mx);
    let o = run(&["maxwell", "--config", &cfg], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("w_e.csv").exists() && d.join("w_h.csv").exists());
    let o = run(&["maxwell", "--chiral", "0.1", "--config", &cfg], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let wrong = mx.replace("\"mu\": [4, 0]", "\"mu\": [9, 0]");
    let cfg = write_config(&d, &wrong);
    let o = run(&["maxwell", "--config", &cfg], &d);
    assert_eq!(o.status.code(), Some(2), "lambda inconsistent with the medium");
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn neumann_writes_mesh_and_report() {
    let d = scratch("neumann");
    let cfg = SMALL
        .replace("\"re\": 2.0, \"im\": 0.0", "\"re\": 1.0, \"im\": 0.5")
        .replace("{\"builtin\": \"smooth\"}", "{\"builtin\": \"constant\", \"params\": {\"value\": [[0,0],[0,0],[0,0]]}}")
        .replace(
            "\"output\"",
            "\"neumann\": {\"mesh_level\": 3, \"boundary\": {\"builtin\": \"beltrami-wave\"}},\n    \"output\"",
        );
    let cfg = write_config(&d, &cfg);
    let o = run(&["neumann", "--config", &cfg], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let off = std::fs::read_to_string(d.join("mesh.off")).unwrap();
    assert!(off.starts_with("OFF\n642 1280 0\n"));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("w.report.json")).unwrap()).unwrap();
    assert_eq!(r["results"]["report"]["triangles"], 1280);
    std::fs::remove_dir_all(&d).unwrap();
}
