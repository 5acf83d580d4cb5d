use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dopkit(args: &[&str]) -> Output {
    dopkit_env(args, &[])
}

fn dopkit_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dopkit"));
    cmd.args(args).env_remove("DOPKIT_PRECISION_BITS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

/// Data rows of a CSV output, without the config comment and header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn nodes_of_the_uniform_density() {
    let o = dopkit(&["nodes", "--density", "uniform", "--a", "0", "--b", "1", "--N", "4"]);
    assert!(o.status.success());
    let x: Vec<f64> = rows(&stdout(&o)).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(x, vec![0.125, 0.375, 0.625, 0.875]);
    assert!(stdout(&o).starts_with("# {"));
}

#[test]
fn polynomial_density_nodes() {
    let o = dopkit(&["nodes", "--density", "0,2", "--N", "2", "--out", "json"]);
    assert!(o.status.success());
    let r = report(&o);
    let x1 = r["result"][1]["x"].as_f64().unwrap();
    assert!((x1 - 0.75f64.sqrt()).abs() < 1e-14);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(dopkit(&["nodes", "--N", "4", "--bogus"]).status.code(), Some(1));
    assert_eq!(dopkit(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dopkit(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_config_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "w.json", "{\n  \"kind\": \"krawtchouk\",\n  \"p\": 0.5,,\n}\n");
    let o = dopkit(&["zeros", "--config", p.to_str().unwrap(), "--N", "10", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("w.json:3:"), "{err}");
}

#[test]
fn degree_must_be_integral() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "w.json", r#"{"kind": "krawtchouk", "p": 0.5}"#);
    let o = dopkit(&["verify", "--config", p.to_str().unwrap(), "--c", "1/2", "--N", "15"]);
    assert_eq!(o.status.code(), Some(1));
    let o = dopkit(&["verify", "--config", p.to_str().unwrap(), "--c", "0.5", "--N", "16"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn zeros_and_poly_agree() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "w.json", r#"{"kind": "hahn", "alpha": 2, "beta": 3, "N": 20}"#);
    let cfg = p.to_str().unwrap();
    let z = dopkit(&["zeros", "--config", cfg, "--k", "7"]);
    assert!(z.status.success());
    let zs: Vec<f64> = rows(&stdout(&z)).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(zs.len(), 7);
    assert!(zs.windows(2).all(|w| w[0] < w[1]));
    let grid = format!("{}:{}:2", zs[2] - 1e-9, zs[2] + 1e-9);
    let o = dopkit(&["poly", "--config", cfg, "--k", "7", "--eval-grid", &grid]);
    let signs: Vec<String> = rows(&stdout(&o)).iter().map(|r| r[2].clone()).collect();
    assert_ne!(signs[0], signs[1]);
}

#[test]
fn outputs_are_atomic_files_with_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "w.json", r#"{"kind": "krawtchouk", "p": 0.3, "N": 12, "seed": 5}"#);
    let out = dir.path().join("s.csv");
    let args = ["sample", "--config", p.to_str().unwrap(), "--k", "4", "--n-samples", "50", "--out", out.to_str().unwrap()];
    assert!(dopkit(&args).status.success());
    let first = std::fs::read_to_string(&out).unwrap();
    assert!(dopkit(&args).status.success());
    assert_eq!(first, std::fs::read_to_string(&out).unwrap());
    let head: Value = serde_json::from_str(first.lines().next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(head["run"]["seed"], 5);
    assert_eq!(head["run"]["p"], 0.3);
    let data = rows(&first);
    assert_eq!(data.len(), 50 * 4);
    for s in 0..50 {
        assert_eq!(data.iter().filter(|r| r[0] == s.to_string()).count(), 4);
    }
    // only the output file is left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn precision_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "w.json", r#"{"kind": "krawtchouk", "p": 0.5, "N": 10}"#);
    let cfg = p.to_str().unwrap();
    let o = dopkit_env(&["zeros", "--config", cfg, "--k", "3"], &[("DOPKIT_PRECISION_BITS", "256")]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"bits\":256"));
    let o = dopkit_env(&["zeros", "--config", cfg, "--k", "3"], &[("DOPKIT_PRECISION_BITS", "lots")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn hexagon_counts_and_profiles() {
    let o = dopkit(&["hexagon", "--a", "1", "--b", "1", "--c", "1"]);
    assert_eq!(rows(&stdout(&o))[0][3], "2");
    let o = dopkit(&["hexagon", "--a", "3", "--b", "2", "--c", "2", "--m", "2", "--profile"]);
    assert!(o.status.success());
    for r in rows(&stdout(&o)) {
        let h: f64 = r[1].parse().unwrap();
        let p: f64 = r[2].parse().unwrap();
        assert!((h + p - 1.0).abs() < 1e-12);
    }
    let o = dopkit(&[
        "hexagon", "--alpha", "1", "--beta", "1", "--gamma", "1", "--tau", "1.0", "--n", "10", "--boundary",
        "--grid", "400",
    ]);
    assert!(o.status.success());
    assert!(report(&o)["result"]["relative_deviation"].as_f64().unwrap() < 0.05);
}

#[test]
fn equilibrium_and_kernel_reports() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "w.json", r#"{"kind": "krawtchouk", "p": 0.5, "N": 40, "c": "1/4", "grid": 400}"#);
    let cfg = p.to_str().unwrap();
    let o = dopkit(&["eqm", "--config", cfg]);
    assert!(o.status.success());
    let r = report(&o);
    let kinds: Vec<&str> = r["result"]["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["Void", "Band", "Void"]);
    let o = dopkit(&["kernel", "--config", cfg, "--k", "10", "--stats", "diag,sine,gaps"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert!((r["result"]["trace"].as_f64().unwrap() - 10.0).abs() < 1e-10);
    assert_eq!(r["result"]["diag"].as_array().unwrap().len(), 40);
    assert!(r["result"]["gaps"].as_array().unwrap().len() == 2);
    let o = dopkit(&["kernel", "--config", cfg, "--k", "10", "--stats", "spectrum"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_reports_every_check_and_trends() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "w.json", r#"{"kind": "krawtchouk", "p": 0.9}"#);
    let out = dir.path().join("report.json");
    let o = dopkit(&[
        "verify", "--config", p.to_str().unwrap(), "--c", "1/2", "--N", "40,80", "--grid", "600",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let runs = r["result"]["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    for run in runs {
        assert_eq!(run["band"].as_array().unwrap().len(), 1);
        assert_eq!(run["saturated"].as_array().unwrap().len(), 1);
        assert_eq!(run["hardedge"].as_array().unwrap().len(), 1);
        assert!(run["band"][0].get("samples").is_none());
    }
    assert!(r["result"]["trends"]["saturated_offset_ratio"].as_f64().unwrap() > 1.0);
}

#[test]
fn small_acceptance_suite_passes() {
    let o = dopkit(&["accept", "--suite", "small", "--out", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|row| row[2] == "true"));
    assert_eq!(dopkit(&["accept", "--suite", "medium"]).status.code(), Some(1));
}
