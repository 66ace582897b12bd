use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sgv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgv")).args(args).env("SGV_LOG", "error").output().expect("sgv runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn eig_flat_torus() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        sgv(&["eig", "--manifold", "flat-torus", "--L", "1", "--fiber", "0.1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lambda = json_stdout(&out)["lambda1"].as_f64().unwrap();
    assert!((lambda / (4.0 * PI * PI) - 1.0).abs() < 1e-8, "lambda1 = {lambda}");
    assert!(dir.path().join("eig.json").exists());
    let csv = fs::read_to_string(dir.path().join("eigenfunction.csv")).unwrap();
    assert!(csv.starts_with("t,u\n"));
    assert!(csv.lines().count() > 100);
}

#[test]
fn ledger_golden_term() {
    let out =
        sgv(&["ledger", "--n", "2", "--p", "2", "--D", "3.14159", "--delta", "0.1", "--Cs", "10", "--Lambda", "0.01"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_stdout(&out);
    let term1 = v["eps_terms"][0].as_f64().unwrap();
    assert!((term1 / 9.370_768_648_512_11e-4 - 1.0).abs() < 1e-9, "term1 = {term1}");
    assert!((v["tau"].as_f64().unwrap() - 17.0).abs() < 1e-12);
}

#[test]
fn ledger_table_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = sgv(&[
        "--out", d, "ledger", "--n", "3", "--p", "2", "--D", "3", "--delta", "0.1", "--Cs", "1", "--Lambda", "0.5",
        "--table",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("eps_max")));
    assert!(dir.path().join("ledger.json").exists());
    assert_eq!(fs::read_to_string(dir.path().join("ledger.txt")).unwrap(), text);
}

#[test]
fn ode_check_passes() {
    let out = sgv(&["ode-check", "--eta", "1.1", "--u-points", "2000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_stdout(&out);
    for i in v["integrals"].as_array().unwrap() {
        assert!(i["value"].as_f64().unwrap() >= PI - 1e-9);
    }
    assert!(v["z_tilde"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"manifold": {"kind": "sine-sphere", "n": 2, "R": 1.0}, "colour": "red"}"#).unwrap();
    let out = sgv(&["--config", cfg.to_str().unwrap(), "kbar"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn invalid_parameters_exit_2() {
    let out = sgv(&["ledger", "--n", "2", "--p", "2", "--D", "3", "--delta", "0.5", "--Cs", "1", "--Lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sgv(&["kbar", "--manifold", "flat-torus", "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sgv(&["eig"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_supplies_manifold_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"manifold": {"kind": "sine-sphere", "n": 2, "R": 1.0}}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let base = json_stdout(&sgv(&["--config", c, "eig"]))["lambda1"].as_f64().unwrap();
    assert!((base - 2.0).abs() < 1e-8, "{base}");
    let scaled = json_stdout(&sgv(&["--config", c, "eig", "--R", "2"]))["lambda1"].as_f64().unwrap();
    assert!((scaled - 0.5).abs() < 1e-8, "{scaled}");
}

#[test]
fn sweep_is_deterministic_and_plots() {
    let run = |dir: &Path, jobs: &str| {
        let out = sgv(&[
            "--out",
            dir.to_str().unwrap(),
            "sweep",
            "--family",
            "flat-tori",
            "--L",
            "1",
            "--values",
            "0.2,0.1",
            "--jobs",
            jobs,
            "--plot",
            "sharpness-vs-aspect,kbar-vs-lambda1,alpha-vs-delta",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(a.path(), "1");
    run(b.path(), "2");
    for name in ["sweep.json", "sweep.csv", "sharpness-vs-aspect.csv", "sharpness-vs-aspect.svg", "alpha-vs-delta.svg"]
    {
        let x = fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name} differs");
    }
    let svg = fs::read_to_string(a.path().join("kbar-vs-lambda1.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("width=\"800\""));
    let report = read_json(&a.path().join("sweep.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert_eq!(report["summary"]["violations"].as_u64(), Some(0));
}

#[test]
fn verify_writes_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = sgv(&[
        "--out",
        dir.path().to_str().unwrap(),
        "verify",
        "--manifold",
        "flat-torus",
        "--L",
        "1",
        "--fiber",
        "0.2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = read_json(&dir.path().join("verify.json"));
    assert_eq!(rec["hypothesis_met"], Value::Bool(true));
    assert!(rec["theorem_margin"].as_f64().unwrap() > 0.0);
    assert!(rec["violations"].as_array().unwrap().is_empty());
}

#[test]
fn curvature_and_diameter() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = sgv(&["--out", d, "curvature", "--manifold", "sine-sphere", "--n", "3", "--points", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,rho,rho_H"));
    let out = sgv(&["diameter", "--manifold", "sine-sphere", "--R", "2"]);
    let v = json_stdout(&out);
    assert!((v["hi"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn example_config_runs() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/example-config.json");
    let out = sgv(&["--config", cfg, "verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = json_stdout(&out);
    assert_eq!(rec["hypothesis_met"], Value::Bool(true));
    assert!(rec["theorem_margin"].as_f64().unwrap() > 0.0);
    let out = sgv(&["--config", cfg, "ledger"]);
    assert_eq!(out.status.code(), Some(0));
}
