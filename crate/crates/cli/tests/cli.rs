use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hopf-dde"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("HOPF_DDE_WORKERS")
        .output()
        .unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("json diagnostic");
    serde_json::from_str(line).unwrap()
}

#[test]
fn report_writes_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["report"], "model.k = 17.5\nmodel.tau = 60\n");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert!(csv.starts_with("case,name,value,residual,tolerance,provenance\n"));
    assert!(csv.contains("case000,tau0,"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(json["cases"][0]["normal_form"]["classification"], "supercritical, orbitally stable, period increasing");
}

#[test]
fn missing_hopf_point_is_a_math_error() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["normal-form"], "model.k = 120\nmodel.tau = 60\n");
    assert_eq!(out.status.code(), Some(3));
    let diag = stderr_json(&out);
    assert_eq!(diag["error"]["kind"], "math");
    assert_eq!(diag["error"]["stage"], "hopf");
    assert!(!dir.path().join("out/report.csv").exists());
}

#[test]
fn invalid_parameters_list_every_violation() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["equilibrium"], "model.k = -1\nmodel.a = 0\nmodel.tau = 60\n");
    assert_eq!(out.status.code(), Some(2));
    let diag = stderr_json(&out);
    let v = diag["error"]["violations"].as_array().unwrap();
    assert!(v.iter().any(|m| m.as_str().unwrap().starts_with("model.k")));
    assert!(v.iter().any(|m| m.as_str().unwrap().starts_with("model.a")));
}

#[test]
fn unknown_command_and_missing_config() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(dir.path(), &["frobnicate"], "").status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_hopf-dde"))
        .args(["equilibrium", "--config", "/nonexistent/run.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulation_writes_one_chart_per_component() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["simulate", "--format", "csv,svg"],
        "model.k = 17.5\nmodel.tau = 60\nsim.tau_factor = 1.05\nsim.periods = 10\n",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut svgs: Vec<String> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".svg"))
        .collect();
    svgs.sort();
    assert_eq!(svgs, ["case000_y1.svg", "case000_y2.svg"]);
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn sweep_is_reproducible_across_worker_counts() {
    let cfg = "model.tau = 60\nsweep.variable = k\nsweep.from = 5\nsweep.to = 1750\nsweep.steps = 6\n";
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let dir = TempDir::new().unwrap();
        let out = run(dir.path(), &["sweep", "--workers", workers], cfg);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((
            fs::read(dir.path().join("out/report.csv")).unwrap(),
            fs::read(dir.path().join("out/report.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(csv.contains(",error,"), "sweep keeps failing cases as rows");
}
