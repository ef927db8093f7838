//! End-to-end tests of the `coopbeam` binary: golden CSV output, JSON mode,
//! manifest emission and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_coopbeam")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("coopbeam-cli-tests");
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir.join(name)
}

#[test]
fn sweep_matches_golden_csv() {
    let out = run(&["sweep", "--config", data("demo.conf").to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let golden = std::fs::read(data("golden_sweep.csv")).expect("golden fixture");
    assert_eq!(out.stdout, golden);
}

#[test]
fn sweep_json_round_trips() {
    let out = run(&[
        "sweep",
        "--config",
        data("demo.conf").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    let rows = doc["rows"].as_array().expect("rows array");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["n_nodes"], 6);
    assert_eq!(rows[0]["strategy"], "coop_max_secrecy");
    assert!(rows[0]["mean"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["manifest"]["base_seed"], 42);
    assert!(doc["manifest"]["prng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn out_flag_writes_csv_and_manifest() {
    let csv_path = tmp("sweep.csv");
    let out = run(&[
        "sweep",
        "--config",
        data("demo.conf").to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let body = std::fs::read(&csv_path).expect("CSV written");
    let golden = std::fs::read(data("golden_sweep.csv")).expect("golden fixture");
    assert_eq!(body, golden);

    let manifest_path = tmp("sweep.csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&manifest_path).expect("manifest written"))
            .expect("valid manifest JSON");
    assert_eq!(manifest["base_seed"], 42);
    assert_eq!(manifest["output_paths"][0], csv_path.to_str().unwrap());
}

#[test]
fn seed_and_trials_overrides_change_output() {
    let base = run(&["sweep", "--config", data("demo.conf").to_str().unwrap()]);
    let reseeded = run(&[
        "sweep",
        "--config",
        data("demo.conf").to_str().unwrap(),
        "--seed",
        "43",
    ]);
    assert!(reseeded.status.success());
    assert_ne!(base.stdout, reseeded.stdout);

    let more = run(&[
        "sweep",
        "--config",
        data("demo.conf").to_str().unwrap(),
        "--trials",
        "7",
    ]);
    assert!(more.status.success());
    let text = String::from_utf8(more.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",7")));
}

#[test]
fn config_errors_exit_2() {
    let bad = tmp("bad.conf");
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    let out = run(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));

    let missing = tmp("missing.conf");
    let _ = std::fs::remove_file(&missing);
    let out = run(&["sweep", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn all_infeasible_sweep_exits_3() {
    // nulling needs N >= J + 1, so every trial at N = 2, J = 3 is infeasible
    let conf = tmp("infeasible.conf");
    std::fs::write(
        &conf,
        "strategy = coop_min_power\nfixed_secrecy_capacity = 3\nn_values = 2\nj_values = 3\ntrials = 4\nseed = 1\n",
    )
    .unwrap();
    let out = run(&["sweep", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",NaN,NaN,4,4"));
}

#[test]
fn solve_prints_solution() {
    let out = run(&["solve", "--seed", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("C_s:"));
    assert!(text.contains("w[9]"));
}

#[test]
fn figure_preset_includes_both_strategies() {
    let out = run(&["figure", "--preset", "fig3", "--trials", "3", "--seed", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("coop_min_power"));
    assert!(text.contains("direct_min_power"));
    // direct rows do not depend on N
    let direct: Vec<&str> = text
        .lines()
        .filter(|l| l.contains("direct_min_power") && l.contains(",1,direct"))
        .collect();
    assert_eq!(direct.len(), 5);
    let tail = |l: &str| l.splitn(3, ',').nth(2).map(str::to_string).unwrap();
    assert!(direct.iter().all(|l| tail(l) == tail(direct[0])));
}
