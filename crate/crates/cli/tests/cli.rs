use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn squeezechain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squeezechain"))
        .args(args)
        .env_remove("SQUEEZECHAIN_WORKERS")
        .output()
        .unwrap()
}

fn manifest(path: &Path) -> Value {
    let text = std::fs::read(format!("{}.manifest.json", path.display())).unwrap();
    serde_json::from_slice(&text).unwrap()
}

#[test]
fn ground_sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ground.csv");
    let res = squeezechain(&["ground-sweep", "--n-sites", "20", "--steps", "10", "--output", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,xi2");
    assert_eq!(lines.len(), 12);
    let m = manifest(&out);
    assert_eq!(m["tool"], "squeezechain");
    assert_eq!(m["command"], "ground-sweep");
    assert_eq!(m["n_sites"], 20);
    assert_eq!(m["delta"], 0.8);
    assert_eq!(m["rows"], 11);
    assert!(m["version"].is_string());
    assert!(m["workers"].as_u64().unwrap() >= 1);
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("q.csv");
    let json_path = dir.path().join("q.json");
    let common = ["quench", "--n-sites", "16", "--h1", "0.5", "--h2", "1.2", "--t-max", "3", "--dt", "0.5"];
    for (path, format) in [(&csv_path, "csv"), (&json_path, "json")] {
        let mut args = common.to_vec();
        args.extend(["--format", format, "--output", path.to_str().unwrap()]);
        assert!(squeezechain(&args).status.success());
    }
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let rows: Vec<Value> = serde_json::from_slice(&std::fs::read(&json_path).unwrap()).unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), rows.len());
    for (rec, obj) in records.iter().zip(&rows) {
        let keys: Vec<&String> = obj.as_object().unwrap().keys().collect();
        assert_eq!(keys, header.iter().collect::<Vec<_>>());
        for (name, field) in header.iter().zip(rec.iter()) {
            assert_eq!(field.parse::<f64>().unwrap(), obj[name].as_f64().unwrap());
        }
    }
}

#[test]
fn stdout_gets_data_and_stderr_the_manifest() {
    let res = squeezechain(&["ground-sweep", "--n-sites", "10", "--steps", "2"]);
    assert!(res.status.success());
    assert!(String::from_utf8(res.stdout).unwrap().starts_with("h,xi2\n"));
    let m: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(m["rows"], 3);
}

#[test]
fn invalid_input_exits_with_2() {
    for args in [
        &["ground-sweep", "--h-min", "2", "--h-max", "1"][..],
        &["ground-sweep", "--n-sites", "1"],
        &["quench", "--h2", "1.0"],
        &["revival-scan", "--h1", "0.9", "--h2", "1.0", "--sizes", "80"],
        &["average-sweep", "--h1", "2", "--avg-window", "banana"],
    ] {
        let res = squeezechain(args);
        assert_eq!(res.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&res.stderr));
    }
}

#[test]
fn config_file_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n-sites = 12\nsteps = 4\ndelta = 0.5\n").unwrap();
    let out = dir.path().join("g.csv");
    let res = squeezechain(&[
        "--config",
        cfg.to_str().unwrap(),
        "ground-sweep",
        "--steps",
        "6",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let m = manifest(&out);
    assert_eq!(m["n_sites"], 12);
    assert_eq!(m["steps"], 6);
    assert_eq!(m["delta"], 0.5);

    std::fs::write(&cfg, "n-sites = 12\ncolour = 3\n").unwrap();
    let res = squeezechain(&["--config", cfg.to_str().unwrap(), "ground-sweep"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn workers_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let run = |env: &str, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_squeezechain"));
        cmd.args(["ground-sweep", "--n-sites", "10", "--steps", "2", "--output", out.to_str().unwrap()])
            .args(extra)
            .env("SQUEEZECHAIN_WORKERS", env);
        cmd.output().unwrap()
    };
    assert!(run("3", &[]).status.success());
    assert_eq!(manifest(&out)["workers"], 3);
    assert!(run("3", &["--workers", "1"]).status.success());
    assert_eq!(manifest(&out)["workers"], 1);
    assert_eq!(run("many", &[]).status.code(), Some(2));
}

#[test]
fn oracle_check_passes() {
    let res = squeezechain(&["oracle-check", "--tuples", "3", "--format", "json"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let rows: Vec<Value> = serde_json::from_slice(&res.stdout).unwrap();
    assert!(rows.iter().all(|r| r["max_deviation"].as_f64().unwrap() < 1e-9));
}

#[test]
fn revival_scan_reports_a_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rev.csv");
    let res = squeezechain(&[
        "revival-scan",
        "--h1",
        "0.9",
        "--h2",
        "1.0",
        "--sizes",
        "40,60,80",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("slope k ="));
    let k = manifest(&out)["summary"]["slope"].as_f64().unwrap();
    assert!((0.55..0.7).contains(&k), "k = {k}");
}
