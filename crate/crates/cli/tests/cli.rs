use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phasecover"));
    c.env_remove("PHASECOVER_THREADS");
    c
}

fn fixture_value(name: &str) -> Value {
    serde_json::from_str(phasecover_cli::fixture(name).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.display().to_string()
}

fn run(config: &str, out: &Path) -> Output {
    bin()
        .args(["run", "--config", config, "--out"])
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_fixtures_names_bundled_configs() {
    let o = bin().arg("list-fixtures").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["gabor16.json", "gabor16_theta.json", "gabor32.json", "localized_frame.json"] {
        assert!(text.lines().any(|l| l == name), "{name} missing from {text}");
    }
}

#[test]
fn every_fixture_parses_and_validates() {
    for (name, text) in phasecover_cli::FIXTURES {
        phasecover_cli::ExperimentConfig::from_json(text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn gabor16_fixture_writes_all_outputs() {
    let out = tempfile::tempdir().unwrap();
    let o = run("gabor16.json", out.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let eq = fs::read_to_string(out.path().join("equivalence.csv")).unwrap();
    let rows: Vec<&str> = eq.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let ps: Vec<&str> = rows.iter().map(|r| r.split(',').nth(3).unwrap()).collect();
    assert_eq!(ps, ["1", "2", "inf"]);

    let inv: Value = serde_json::from_str(&fs::read_to_string(out.path().join("invariants.json")).unwrap()).unwrap();
    assert_eq!(inv["pass"], Value::Bool(true));
    let hash = inv["config_hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 16);
    for name in ["certificate.csv", "equivalence.csv", "plotdata/error_vs_u.csv"] {
        let text = fs::read_to_string(out.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("config_hash,"));
        for l in lines {
            assert!(l.starts_with(&format!("{hash},")), "{name}: {l}");
        }
    }
}

#[test]
fn thread_count_does_not_change_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = bin()
        .args(["run", "--config", "gabor16.json", "--threads", "1", "--out"])
        .arg(a.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let o = bin()
        .env("PHASECOVER_THREADS", "3")
        .args(["run", "--config", "gabor16.json", "--threads", "1", "--out"])
        .arg(b.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["certificate.csv", "equivalence.csv", "plotdata/error_vs_u.csv", "invariants.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn bad_thread_env_is_a_validation_error() {
    let out = tempfile::tempdir().unwrap();
    let o = bin()
        .env("PHASECOVER_THREADS", "many")
        .args(["run", "--config", "gabor16.json", "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("PHASECOVER_THREADS"));
}

#[test]
fn empty_space_list_names_spaces() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = fixture_value("gabor16.json");
    v["spaces"] = Value::Array(vec![]);
    let cfg = write_config(dir.path(), "empty.json", &v);
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`spaces`"), "{}", stderr(&o));
}

#[test]
fn unknown_and_missing_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = fixture_value("gabor16.json");
    v["partition"]["colour"] = Value::from("blue");
    let cfg = write_config(dir.path(), "unknown.json", &v);
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));

    let mut v = fixture_value("gabor16.json");
    v.as_object_mut().unwrap().remove("seed");
    let cfg = write_config(dir.path(), "noseed.json", &v);
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn field_paths_in_semantic_errors() {
    let mut v = fixture_value("gabor16.json");
    v["spaces"][1]["p"] = Value::from(0.5);
    let err = phasecover_cli::ExperimentConfig::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("spaces[1].p"), "{err}");
    let mut v = fixture_value("gabor16.json");
    v["partition"]["spacing"] = Value::from(3);
    let err = phasecover_cli::ExperimentConfig::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("partition.spacing"), "{err}");
}

#[test]
fn non_frame_system_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = fixture_value("gabor16.json");
    v["system"] = serde_json::json!({ "family": "gabor", "a": 8, "b": 4 });
    let cfg = write_config(dir.path(), "sparse.json", &v);
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("not a frame"), "{}", stderr(&o));
}

#[test]
fn verify_against_fresh_run_and_perturbations() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base");
    assert!(run("gabor16.json", &base).status.success());

    let verify = |config: &str, baseline: &Path| {
        bin()
            .args(["verify", "--config", config, "--baseline"])
            .arg(baseline)
            .output()
            .unwrap()
    };
    let o = verify("gabor16.json", &base);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    // jitter far below the cell tolerance
    let path = base.join("certificate.csv");
    let text = fs::read_to_string(&path).unwrap();
    let jittered: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                return l.to_string();
            }
            let mut cells: Vec<String> = l.split(',').map(String::from).collect();
            let x: f64 = cells[3].parse().unwrap();
            cells[3] = format!("{:e}", x + 5e-13);
            cells.join(",")
        })
        .collect();
    fs::write(&path, jittered.join("\n") + "\n").unwrap();
    let o = verify("gabor16.json", &base);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let mut v = fixture_value("gabor16.json");
    v["seed"] = Value::from(7);
    let cfg = write_config(dir.path(), "seed7.json", &v);
    let o = verify(&cfg, &base);
    assert_eq!(o.status.code(), Some(3));
    let msg = stderr(&o);
    assert!(msg.contains("certificate.csv:2") && msg.contains("column `"), "{msg}");

    let o = verify("gabor16.json", &dir.path().join("nowhere"));
    assert_eq!(o.status.code(), Some(1));
    fs::remove_file(base.join("equivalence.csv")).unwrap();
    let o = verify("gabor16.json", &base);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("equivalence.csv"));
}

#[test]
fn numeric_cell_mismatch_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = phasecover_cli::ExperimentConfig::from_json(phasecover_cli::fixture("gabor16.json").unwrap()).unwrap();
    let art = phasecover_cli::run(&cfg, dir.path(), 1).unwrap();
    let path = dir.path().join("equivalence.csv");
    let text = fs::read_to_string(&path).unwrap().replacen(",const(1),100,", ",const(1),99,", 1);
    fs::write(&path, text).unwrap();
    let err = phasecover_cli::verify::verify_artifacts(&art, dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("equivalence.csv:2 column `trial_count`"), "{err}");
}
