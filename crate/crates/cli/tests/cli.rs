use std::path::Path;
use std::process::{Command, Output};

use entsearch_core::{EntangledState, GoodSet};
use serde_json::Value;
use tempfile::TempDir;

fn entsearch(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_entsearch"));
    cmd.args(args).env_remove("ENTSEARCH_MAX_AMPLITUDES");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(cmd: &str, config: &str) -> (i32, String, String) {
    let out = entsearch(&[cmd, "--config", config], &[]);
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).expect("report is json")
}

#[test]
fn find_flat_four() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "f.json",
        r#"{"kind": "find", "n_qubits": 2, "state": "flat", "good": {"indices": [0]}}"#,
    );
    let (code, out, _) = run("find", &cfg);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["passed"], true);
    assert!((r["result"]["table"][1]["simulated"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(r["result"]["max_probability_deviation"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["result"]["best_n"], 1);
    for c in r["checks"].as_array().unwrap() {
        assert!(c["tolerance"].is_number() && c["passed"].is_boolean());
    }
}

#[test]
fn find_one_to_one_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "f.json",
        r#"{"kind": "find", "n_qubits": 3, "data_dim": 8, "state": "one_to_one", "good": {"indices": [2, 7]}}"#,
    );
    let (code, out, _) = run("find", &cfg);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["result"]["degenerate"], true);
    for row in r["result"]["table"].as_array().unwrap() {
        assert!((row["simulated"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    }
}

#[test]
fn malformed_config_exits_one_without_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.json", "{\"kind\": \"find\",\n  \"n_qubits\": }");
    let out_path = dir.path().join("report.json");
    let out = entsearch(
        &[
            "find",
            "--config",
            &cfg,
            "--out",
            out_path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out_path.exists());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.json:2:"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "f.json",
        r#"{"kind": "find", "n_qubits": 2, "state": "flat", "good": {"indices": [0]}}"#,
    );
    assert_eq!(run("count", &cfg).0, 1);
    assert_eq!(entsearch(&["launch"], &[]).status.code(), Some(1));
    assert_eq!(entsearch(&["find"], &[]).status.code(), Some(1));
    assert_eq!(
        run("find", dir.path().join("missing.json").to_str().unwrap()).0,
        1
    );
}

#[test]
fn count_flat_sixteen() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"kind": "count", "n_qubits": 4, "state": "flat", "good": {"indices": [0, 1, 2, 3]},
            "p": 16, "repetitions": 101, "seed": 7}"#,
    );
    let (code, out, _) = run("count", &cfg);
    assert_eq!(code, 0);
    let r = json(&out);
    let res = &r["result"];
    assert!((res["bound"].as_f64().unwrap() - 3.758).abs() < 1e-3);
    assert_eq!(res["bound_satisfied"], true);
    assert_eq!(res["case"], "interior");
    assert_eq!(res["window"], serde_json::json!([2, 3, 13, 14]));
    assert!(res["W_empirical"].as_f64().unwrap() > 0.5);
    assert!(
        (res["W_predicted"].as_f64().unwrap() - res["w_circuit"].as_f64().unwrap()).abs() < 1e-9
    );
}

#[test]
fn count_without_good_items() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"kind": "count", "n_qubits": 3, "state": "flat", "good": {"indices": []}, "p": 8}"#,
    );
    let (code, out, _) = run("count", &cfg);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["result"]["majority_t"], 0.0);
}

#[test]
fn count_rejects_register_of_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"kind": "count", "n_qubits": 2, "state": "flat", "good": {"indices": [0]}, "p": 3}"#,
    );
    let (code, out, err) = run("count", &cfg);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("power of two"), "{err}");
}

#[test]
fn state_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let good = GoodSet::new(8, vec![1, 4]).unwrap();
    let state = EntangledState::random(3, 2, &good, 9).unwrap();
    write(&dir, "state.json", &serde_json::to_string(&state).unwrap());
    let cfg = write(
        &dir,
        "f.json",
        r#"{"kind": "find", "state": {"file": "state.json"}, "good": {"indices": [1, 4]}, "iterations": 20}"#,
    );
    let (code, out, _) = run("find", &cfg);
    assert_eq!(code, 0, "{out}");
    let r = json(&out);
    assert_eq!(r["result"]["table"].as_array().unwrap().len(), 21);
    let back: EntangledState =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("state.json")).unwrap())
            .unwrap();
    assert_eq!(back, state);
}

#[test]
fn verify_tight_tolerance_fails_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "v.json",
        r#"{"kind": "verify", "seed": 3,
            "tolerances": {"amplitude": 1e-15, "probability": 1e-15, "unitarity": 1e-15, "reduction": 1e-15, "p_max": 1e-15},
            "verify": {"criteria": [1, 2, 3, 4, 5]}}"#,
    );
    let (code, out, _) = run("verify", &cfg);
    assert_eq!(code, 2);
    let r = json(&out);
    assert_eq!(r["passed"], false);
    let failed = r["result"]["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .count();
    assert!(failed >= 3, "{failed}");
}

#[test]
fn verify_verdicts_do_not_depend_on_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "v.json",
        r#"{"kind": "verify", "verify": {"corpus_size": 30, "criteria": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]}}"#,
    );
    for seed in 0..10u64 {
        let out = entsearch(
            &[
                "verify",
                "--config",
                &cfg,
                "--seed",
                &seed.to_string(),
                "--workers",
                "2",
            ],
            &[],
        );
        assert_eq!(out.status.code(), Some(0), "seed {seed}");
        let r = json(std::str::from_utf8(&out.stdout).unwrap());
        assert_eq!(r["scenario"]["seed"], seed);
        assert!(r["result"]["criteria"]
            .as_array()
            .unwrap()
            .iter()
            .all(|c| c["passed"] == true));
    }
}

#[test]
fn sweep_grid_of_four() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "s.json",
        r#"{"kind": "sweep", "output": "csv", "grid": {"n": [8, 16], "t": [1, 2], "p": [16]}}"#,
    );
    let (code, out, err) = run("sweep", &cfg);
    assert_eq!(code, 0, "{err}");
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(&r[col("status")], "ok");
        for dev in [
            "max_row_deviation",
            "max_probability_deviation",
            "max_variance_delta",
            "w_deviation",
        ] {
            assert!(r[col(dev)].parse::<f64>().unwrap() < 1e-9, "{dev}");
        }
    }
    let keys: Vec<(String, String)> = rows
        .iter()
        .map(|r| (r[0].to_string(), r[2].to_string()))
        .collect();
    assert_eq!(
        keys,
        [("8", "1"), ("8", "2"), ("16", "1"), ("16", "2")].map(|(a, b)| (a.into(), b.into()))
    );
}

#[test]
fn sweep_empty_grid_is_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "s.json",
        r#"{"kind": "sweep", "output": "csv", "grid": {"n": [], "t": [1]}}"#,
    );
    let (code, out, _) = run("sweep", &cfg);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("N,D,t,P,seed,status"));
}

#[test]
fn sweep_memory_cap_skips_cells() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "s.json",
        r#"{"kind": "sweep", "output": "csv", "grid": {"n": [8, 64], "t": [1], "p": [8]}}"#,
    );
    let out = entsearch(
        &["sweep", "--config", &cfg],
        &[("ENTSEARCH_MAX_AMPLITUDES", "100")],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains(",ok,"));
    assert!(lines[2].contains("skipped"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning:"));
}

#[test]
fn reports_are_bit_identical() {
    let dir = TempDir::new().unwrap();
    let sweep = write(
        &dir,
        "s.json",
        r#"{"kind": "sweep", "seed": 5, "grid": {"n": [8, 16, 32], "t": [1, 3], "data_dim": [1, 3], "p": [8, 32]}}"#,
    );
    let a = entsearch(&["sweep", "--config", &sweep, "--workers", "1"], &[]).stdout;
    let b = entsearch(&["sweep", "--config", &sweep, "--workers", "4"], &[]).stdout;
    let c = entsearch(&["sweep", "--config", &sweep, "--workers", "4"], &[]).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(b, c);

    let count = write(
        &dir,
        "c.json",
        r#"{"kind": "count", "n_qubits": 5, "data_dim": 2, "state": {"random": {"seed": 3}},
            "good": {"random": {"t": 5, "seed": 4}}, "p": 32, "seed": 11}"#,
    );
    let out = dir.path().join("c.out");
    let out = out.to_str().unwrap();
    let first = entsearch(&["count", "--config", &count], &[]).stdout;
    entsearch(&["count", "--config", &count, "--out", out], &[]);
    assert_eq!(first, std::fs::read(Path::new(out)).unwrap());
}

#[test]
fn timings_are_opt_in() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "f.json",
        r#"{"kind": "find", "n_qubits": 2, "state": "flat", "good": {"indices": [0]}}"#,
    );
    let plain = json(&run("find", &cfg).1);
    assert!(plain.get("wall_clock_s").is_none());
    let timed = entsearch(&["find", "--config", &cfg, "--timings"], &[]);
    assert!(json(std::str::from_utf8(&timed.stdout).unwrap())["wall_clock_s"].is_number());
}
