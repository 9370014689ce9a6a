//! End-to-end tests of the command-line interface.

use std::path::Path;
use std::process::{Command, Output};

fn qwb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwb"))
        .args(args)
        .current_dir(dir)
        .env_remove("QWB_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_solve_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("inst.cnf");
    let args = ["gen", "--n", "12", "--k", "3", "--m", "24", "--seed", "7"];
    let first = qwb(&args, dir.path());
    assert!(first.status.success());
    let second = qwb(&args, dir.path());
    assert_eq!(
        first.stdout, second.stdout,
        "generation must be byte-identical"
    );
    std::fs::write(&cnf, &first.stdout).unwrap();

    let solve_args = ["solve", "inst.cnf", "--no-timestamp"];
    let a = qwb(&solve_args, dir.path());
    assert!(a.status.success());
    let b = qwb(&solve_args, dir.path());
    assert_eq!(a.stdout, b.stdout, "solve reports must be byte-identical");

    let report: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert!(report.get("timestamp").is_none());
    assert_eq!(report["config"]["seed"], 0);
    let t = report["stats"]["tree_vertices"].as_u64().unwrap();
    assert!(t >= 1);
    assert!(report["stats"]["solutions"].is_array());
}

#[test]
fn gen_json_embeds_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = qwb(
        &[
            "gen", "--n", "8", "--k", "3", "--m", "10", "--seed", "42", "--format", "json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let file: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(file["n"], 8);
    assert_eq!(file["k"], 3);
    assert_eq!(file["m"], 10);
    assert_eq!(file["seed"], 42);
    assert_eq!(file["algorithm_id"], "chacha12");
    assert_eq!(file["clauses"].as_array().unwrap().len(), 10);
}

#[test]
fn expected_size_matches_hand_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = qwb(
        &[
            "expected-size",
            "--n",
            "3",
            "--k",
            "3",
            "--m",
            "1",
            "--no-timestamp",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let e = report["model"]["expected_vertices"].as_f64().unwrap();
    assert!((e - 14.0).abs() < 1e-9, "expected 14, got {e}");
}

#[test]
fn detect_contradiction_reports_no_marked() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("contradiction.cnf");
    std::fs::write(&cnf, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let out = qwb(&["detect", "contradiction.cnf", "--seed", "5"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["outcome"]["verdict"], "no-marked");
    assert_eq!(report["outcome"]["acceptance_probability"], 0.0);
    assert_eq!(report["tree_vertices"], 1);
}

#[test]
fn find_on_satisfiable_instance_returns_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("sat.cnf");
    std::fs::write(&cnf, "p cnf 2 1\n1 2 0\n").unwrap();
    let out = qwb(&["find", "sat.cnf", "--seed", "3"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["outcome"]["found"].is_object());
    let walk_steps = report["transcript"]["walk_steps"].as_u64().unwrap();
    assert!(walk_steps > 0);
}

#[test]
fn unique_find_promise_violation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("two.cnf");
    // two solutions: x1=1 x2 free fails... (x1) has solutions 10 and 11
    std::fs::write(&cnf, "p cnf 2 1\n1 0\n").unwrap();
    let out = qwb(&["unique-find", "two.cnf"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(4),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn vertex_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("big.cnf");
    std::fs::write(&cnf, "p cnf 16 1\n1 2 0\n").unwrap();
    let out = qwb(&["solve", "big.cnf", "--vertex-cap", "100"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = qwb(&["solve", "nope.cnf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = qwb(&["detect", "--bogus-flag"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tree_dump_roundtrips_through_detect() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("sat.cnf");
    std::fs::write(&cnf, "p cnf 3 2\n1 2 0\n-1 3 0\n").unwrap();
    let tree_path = dir.path().join("tree.json");
    let out = qwb(
        &[
            "tree",
            "sat.cnf",
            "--out",
            "tree.json",
            "--operators",
            "ops.coo",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let tree_text = std::fs::read_to_string(&tree_path).unwrap();
    let tree: serde_json::Value = serde_json::from_str(&tree_text).unwrap();
    assert!(tree["T"].as_u64().unwrap() >= 3);
    let ops = std::fs::read_to_string(dir.path().join("ops.coo")).unwrap();
    assert!(ops.contains("# operator A"));

    // detection accepts the bare tree dump
    let out = qwb(&["detect", "tree.json", "--seed", "9"], dir.path());
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["outcome"]["verdict"], "marked-exists");
}

#[test]
fn config_file_is_honored_and_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("qwb.conf");
    std::fs::write(&cfg, "seed=99\ndelta=0.1\n# comment\nbeta=0.25\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qwb"))
        .args([
            "expected-size",
            "--n",
            "4",
            "--k",
            "3",
            "--m",
            "2",
            "--no-timestamp",
        ])
        .current_dir(dir.path())
        .env("QWB_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["config"]["seed"], 99);
    assert_eq!(report["config"]["delta"], 0.1);
    assert_eq!(report["config"]["beta"], 0.25);

    // flags override the file
    let out = Command::new(env!("CARGO_BIN_EXE_qwb"))
        .args([
            "expected-size",
            "--n",
            "4",
            "--k",
            "3",
            "--m",
            "2",
            "--seed",
            "5",
        ])
        .current_dir(dir.path())
        .env("QWB_CONFIG", &cfg)
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["config"]["seed"], 5);
}

#[test]
fn experiment_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = qwb(
        &[
            "experiment",
            "--n-list",
            "10,12",
            "--samples",
            "5",
            "--seed",
            "2",
            "--out",
            "rows.csv",
            "--summary",
            "summary.json",
            "--no-timestamp",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert!(rows.starts_with("n,m,seed,T,walk_steps,satisfiable,solutions\n"));
    assert_eq!(rows.lines().count(), 11);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["summary"].as_array().unwrap().len(), 2);
    assert!(summary["fitted_step_constant"].as_f64().unwrap() > 0.0);
}

#[test]
fn calibrate_writes_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = qwb(
        &[
            "calibrate",
            "--write-config",
            "tuned.conf",
            "--no-timestamp",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let beta = report["calibration"]["beta"].as_f64().unwrap();
    assert!(beta > 0.0);
    let tuned = std::fs::read_to_string(dir.path().join("tuned.conf")).unwrap();
    assert!(tuned.contains(&format!("beta={beta}")));

    // the written file loads cleanly
    let out = Command::new(env!("CARGO_BIN_EXE_qwb"))
        .args([
            "expected-size",
            "--n",
            "4",
            "--k",
            "3",
            "--m",
            "2",
            "--no-timestamp",
        ])
        .current_dir(dir.path())
        .env("QWB_CONFIG", dir.path().join("tuned.conf"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["config"]["beta"].as_f64().unwrap(), beta);
}
