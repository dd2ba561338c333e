use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#"{
  "seed": 7,
  "corpus": { "count": 6, "dims": [1], "degree": [1, 3] },
  "grids": { "q": [2.0] },
  "checks": ["poincare", "chaos_identity"]
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_malliavin-verify")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let out = dir.path().join("out");
    let o = run(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["exit_code"], 0);
    assert!(fs::read_to_string(out.join("summary.csv")).unwrap().starts_with("check,"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("poincare"));
}

#[test]
fn malformed_config_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{ \"seed\": ");
    let o = run(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let cfg = write(dir.path(), "rho.json", r#"{ "grids": { "rho": [1.5] } }"#);
    assert_eq!(run(&["verify", "--config", &cfg]).status.code(), Some(3));
}

#[test]
fn unknown_check_and_usage_errors_exit_3() {
    assert_eq!(run(&["verify", "--check", "nonsense"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn counterexample_is_falsified() {
    let o = run(&["counterexample", "--k", "1,10", "--rho", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.trim_end().ends_with("FALSIFIED-AS-EXPECTED"), "{s}");
    assert_eq!(s.lines().filter(|l| l.starts_with("K = ")).count(), 2);
    assert_eq!(run(&["counterexample", "--k", "-1"]).status.code(), Some(3));
}

#[test]
fn constants_tables() {
    let csv = stdout(&run(&["constants"]));
    assert!(csv.lines().next().unwrap().contains("value"));
    assert!(csv.contains("c_poincare"));
    let dir = tempfile::tempdir().unwrap();
    let grid = write(dir.path(), "grid.json", r#"{ "q": [2.0], "l": [1], "k": [2], "n": [1] }"#);
    let o = run(&["constants", "--grid", &grid, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c2 = v["entries"].as_array().unwrap().iter().find(|e| e["name"] == "c_poincare").unwrap();
    assert_eq!(c2["value"], 1.0);
}

#[test]
fn norms_and_chaos_of_x_squared() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.json", r#"{"dim":1,"codim":1,"components":[[{"alpha":[2],"coeff":"1"}]]}"#);
    let o = run(&["norms", "--functional", &f, "--k", "2", "--q", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // ‖x²‖₂ = √3, ‖2x‖₂ = 2, ‖2‖₂ = 2
    let d: Vec<f64> = v["derivatives"].as_array().unwrap().iter().map(|e| e["value"].as_f64().unwrap()).collect();
    assert!((d[0] - 3f64.sqrt()).abs() < 1e-14 && d[1] == 2.0 && d[2] == 2.0);
    assert!((v["graph"]["value"].as_f64().unwrap() - (3f64.sqrt() + 2.0)).abs() < 1e-14);

    let o = run(&["chaos", "--functional", &f, "--max-order", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["identity_residuals"].as_array().unwrap().iter().all(|r| r["residual"] == 0.0));

    let bad = write(dir.path(), "bad.json", r#"{"dim":1,"codim":2,"components":[]}"#);
    assert_eq!(run(&["chaos", "--functional", &bad]).status.code(), Some(3));
}

#[test]
fn sweep_over_q() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let o = run(&["sweep", "--param", "q", "--range", "2:3:0.5", "--check", "poincare", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.starts_with("check,"));
    assert!(s.lines().skip(1).all(|l| l.starts_with("poincare")));
    assert_eq!(run(&["sweep", "--param", "q", "--range", "3:2:1", "--check", "poincare"]).status.code(), Some(3));
}
