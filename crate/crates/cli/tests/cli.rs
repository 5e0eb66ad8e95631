use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_flrw-lab");

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove(flrw_cli::OUT_ENV)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn exponents_strauss_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["exponents", "--n", "3", "--alpha", "0", "--mu", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    let pc = v["p_c"]["root"].as_f64().unwrap();
    assert!((pc - 2.414214).abs() < 1e-6);
    assert!((pc - v["p_strauss"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(v, json(&dir.path().join("exponents.json")));
}

#[test]
fn exponents_flrw_map() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["exponents", "--flrw", "--n", "3", "--w", "0.3333333"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!((v["mu"].as_f64().unwrap() - 1.5).abs() < 1e-6);
    assert!(v["flrw"]["w_star"].as_f64().is_some());
}

#[test]
fn alpha_one_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["exponents", "--n", "2", "--alpha", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn classify_point_in_c() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["classify", "--n", "2", "--alpha", "0.6", "--mu", "2", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["label"], "C");
}

#[test]
fn kato_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["kato", "threshold", "--p", "2", "--a", "2", "--b", "3", "--q", "1", "--A0", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let th = stdout_json(&o)["threshold"].as_f64().unwrap();
    assert!((th - 10.0).abs() < 1e-12);

    let seq = dir.path().join("seq");
    let o = run(&seq, &["kato", "sequences", "--p", "2", "--b", "1", "--mu", "0.5", "--jmax", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(seq.join("kato_sequences.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,b_j,log_C_j,a_j"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 21);
    for (j, row) in rows.iter().enumerate() {
        let b: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(b, 3.0 * 2f64.powi(j as i32) - 2.0);
    }

    let o = run(dir.path(), &["kato", "sequences", "--p", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn manifest_lists_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["ode", "run", "--preset", "heatlike-n2"]);
    assert_eq!(o.status.code(), Some(0));
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "ode run");
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
    assert_eq!(m["tool_version"], env!("CARGO_PKG_VERSION"));
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs, ["ode_result.json", "ode_trace.csv"]);
    let csv = fs::read(dir.path().join("ode_trace.csv")).unwrap();
    assert!(!csv.contains(&b'\r'));
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["pde", "run", "--config", "/nonexistent/run.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"epsilon": 0.5}"#).unwrap();
    let o = run(&dir.path().join("o"), &["pde", "run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn horizon_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["ode", "run", "--preset", "heatlike-n2", "--t-max", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(dir.path(), &["pde", "run", "--t-max", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"eps": 0.5, "dr": 0.01, "t_max": 500.0}"#).unwrap();
    let a = dir.path().join("a");
    let o = run(&a, &["pde", "run", "--config", cfg.to_str().unwrap(), "--eps", "0.8"]);
    assert_eq!(o.status.code(), Some(0));
    let m = json(&a.join("manifest.json"));
    assert_eq!(m["config"]["eps"], 0.8);
    assert_eq!(m["config"]["dr"], 0.01);
    assert_eq!(m["config"]["t_max"], 500.0);
    assert!(m["outputs"].as_array().unwrap().iter().any(|v| v == "pde_diagnostics.csv"));
    let header = fs::read_to_string(a.join("pde_diagnostics.csv")).unwrap();
    assert!(header.starts_with("t,sup_u,F,Lp,support_radius\n"));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_env");
    let o = Command::new(BIN)
        .args(["classify", "--n", "2", "--alpha", "0.6", "--mu", "2", "--p", "2"])
        .env(flrw_cli::OUT_ENV, &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("classify.json").exists());
    assert!(target.join("manifest.json").exists());
}

#[test]
fn map_requires_preset_or_config() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["map"]).status.code(), Some(2));
}

#[test]
fn json_keys_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["exponents", "--n", "2", "--alpha", "0.5", "--mu", "1"]);
    let text = fs::read_to_string(dir.path().join("exponents.json")).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(text.ends_with("}\n"));
}
