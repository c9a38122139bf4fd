use std::path::Path;
use std::process::{Command, Output};

fn worklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_worklab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn key(text: &str, k: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{k}=")))
        .unwrap_or_else(|| panic!("no {k} in {text}"))
        .parse()
        .unwrap()
}

/// CSV body with the trailing wall-time column removed.
fn without_wall_time(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn work_reports_ghz() {
    let o = worklab(&["work", "--state", "ghz", "--n", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((key(&out, "w_global") - 4.0 * std::f64::consts::LN_2).abs() < 1e-12);
    assert!(key(&out, "w_local").abs() < 1e-12);
}

#[test]
fn work_json_output() {
    let o = worklab(&["work", "--state", "graph", "--graph", "cycle", "--n", "6", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["best_protocol"], "independent_set");
    assert!((v["w_locc_lower"].as_f64().unwrap() - 3.0 * std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn bruteforce_limit_is_a_usage_error() {
    let o = worklab(&["eg", "--n", "30", "--method", "bruteforce"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("N ≤ 4"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let o = worklab(&["launch"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    assert_eq!(worklab(&["work", "--n", "2", "--state", "ghz", "--colour", "red"]).status.code(), Some(1));
}

#[test]
fn every_subcommand_has_help() {
    for args in [
        vec!["--help"],
        vec!["work", "--help"],
        vec!["eg", "--help"],
        vec!["protocol", "--help"],
        vec!["experiment", "scaling", "--help"],
        vec!["experiment", "tail", "--help"],
        vec!["graph", "gen", "--help"],
    ] {
        let o = worklab(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert!(stdout(&o).contains("Usage"), "{args:?}");
    }
}

#[test]
fn stochastic_commands_need_a_seed() {
    for args in [
        vec!["work", "--state", "haar", "--n", "3"],
        vec!["eg", "--state", "circuit", "--n", "3"],
        vec!["eg", "--state", "ghz", "--n", "6"],
        vec!["experiment", "tail", "--n", "4", "--samples", "1000"],
        vec!["graph", "gen", "--kind", "random", "--n", "6"],
    ] {
        let o = worklab(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains("--seed"), "{args:?}: {}", stderr(&o));
    }
    assert!(worklab(&["work", "--state", "haar", "--n", "3", "--seed", "1"]).status.success());
}

#[test]
fn runtime_failures_exit_two() {
    let o = worklab(&["protocol", "--file", "/definitely/missing.json", "--state", "ghz", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn protocol_file_with_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("null.json");
    std::fs::write(&file, r#"{"builtin": "null", "num_sites": 3, "refine_rank_one": true}"#).unwrap();
    let o = worklab(&["protocol", "--file", file.to_str().unwrap(), "--state", "w", "--n", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(key(&out, "rounds"), 2.0);
    let local = stdout(&worklab(&["work", "--state", "w", "--n", "3"]));
    assert!(key(&out, "w_lambda") >= key(&local, "w_local") - 1e-9);
}

#[test]
fn graph_gen_writes_an_edge_list() {
    let o = worklab(&["graph", "gen", "--kind", "hexagonal", "--rows", "2", "--cols", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let g = worklab::graphs::Graph::from_edge_list_str(&stdout(&o)).unwrap();
    assert_eq!(g.num_vertices(), 8);
    assert!((0..8).all(|v| g.degree(v) == 3));
    let a = stdout(&worklab(&["graph", "gen", "--kind", "random", "--n", "9", "--seed", "4"]));
    let b = stdout(&worklab(&["graph", "gen", "--kind", "random", "--n", "9", "--seed", "4"]));
    assert_eq!(a, b);
}

#[test]
fn tail_table_has_a_row_per_alpha() {
    let o = worklab(&["experiment", "tail", "--n", "4", "--samples", "2000", "--alphas", "0.5,1,2", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn scaling_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    std::fs::write(
        &config,
        format!(
            r#"{{"ensemble": {{"kind": "circuit", "depth": 6}}, "n_values": [3, 4], "samples": 5, "base_seed": 42,
                "estimators": {{"eg": {{"method": "alternating", "restarts": 4}}, "protocols": ["subset", "null_refined"]}},
                "output": "{}"}}"#,
            out_a.display()
        ),
    )
    .unwrap();
    let a = Command::new(env!("CARGO_BIN_EXE_worklab"))
        .args(["experiment", "scaling", "--config", config.to_str().unwrap()])
        .env("WORKLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(stdout(&a).contains("w_locc_lower slope="));
    let b = Command::new(env!("CARGO_BIN_EXE_worklab"))
        .args(["experiment", "scaling", "--config", config.to_str().unwrap(), "--output", out_b.to_str().unwrap()])
        .env("WORKLAB_THREADS", "3")
        .output()
        .unwrap();
    assert!(b.status.success(), "{}", stderr(&b));
    let text = std::fs::read_to_string(&out_a).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.starts_with(
        "ensemble,N,sample,seed,w_global,w_local,eg_value,eg_cert,w_locc_upper,w_locc_lower,best_protocol,wall_ms\n"
    ));
    assert_eq!(without_wall_time(&out_a), without_wall_time(&out_b));
}

#[test]
fn scaling_config_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(&config, r#"{"ensemble": {"kind": "haar"}, "n_values": [5], "samples": 1}"#).unwrap();
    let o = worklab(&["experiment", "scaling", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("base_seed"), "{}", stderr(&o));
    std::fs::write(
        &config,
        r#"{"ensemble": {"kind": "haar"}, "n_values": [5], "samples": 1, "base_seed": 1,
            "estimators": {"eg": {"method": "bruteforce"}}}"#,
    )
    .unwrap();
    assert_eq!(worklab(&["experiment", "scaling", "--config", config.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{"ensemble": {"kind": "ghz"}, "n_values": [3], "samples": 1, "base_seed": 1,
            "output": "/nonexistent-dir/out.csv"}"#,
    )
    .unwrap();
    assert_eq!(worklab(&["experiment", "scaling", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}
