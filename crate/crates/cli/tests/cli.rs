use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use symbreak::layered::SyntheticDescription;
use symbreak::{generate, FamilySpec};

fn symbreak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symbreak")).args(args).output().unwrap()
}

fn stderr_record(out: &Output) -> Value {
    serde_json::from_slice(out.stderr.trim_ascii()).unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn epsilon_outside_unit_interval_is_a_config_error() {
    let out = symbreak(&["pipeline", "--family", "grid2d", "--radius", "5", "--epsilon", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    let rec = stderr_record(&out);
    assert_eq!(rec["error"], "invalid_parameter");
    assert_eq!(rec["kind"], "config");
}

#[test]
fn unknown_family_and_bad_flags_are_config_errors() {
    for args in [
        &["pipeline", "--family", "torus", "--radius", "5", "--epsilon", "0.5"][..],
        &["pipeline", "--family", "grid2d", "--radius", "5", "--epsilon", "0.5", "--c=-3"],
        &["pipeline", "--family", "grid2d", "--radius", "0", "--epsilon", "0.5"],
        &["ends", "--family", "line", "--radius", "20", "--epsilon", "0.5", "--levels", "9,3"],
        &["pipeline", "--family", "grid2d", "--radius", "5", "--epsilon", "0.5", "--window", "wide"],
    ] {
        let out = symbreak(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_record(&out)["kind"], "config", "{args:?}");
    }
}

#[test]
fn tree_growth_refusal_names_first_failing_radius() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = symbreak(&[
        "pipeline",
        "--family",
        "tree:3",
        "--radius",
        "6",
        "--epsilon",
        "0.5",
        "--c",
        "1",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let rec = read_json(&report);
    assert_eq!(rec["error"], "growth_refused");
    assert_eq!(rec["details"]["first_failure"], 1);
    assert_eq!(rec["config"]["c"], 1.0);
    assert_eq!(rec, stderr_record(&out));
}

#[test]
fn group_cap_exit_code() {
    let out = symbreak(&["pipeline", "--family", "tree:3", "--radius", "4", "--epsilon", "0.5", "--group-cap", "50"]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(stderr_record(&out)["details"]["cap"], 50);
}

#[test]
fn pipeline_without_report_path_prints_the_report() {
    let out = symbreak(&["pipeline", "--family", "grid2d", "--radius", "12", "--epsilon", "0.9"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["c"], "auto");
    assert_eq!(v["config"]["subcommand"], "pipeline");
    assert!(v["report"]["c"].as_f64().unwrap() > 0.0);
    assert_eq!(v["report"]["verification"]["survivors"], Value::Array(vec![]));
    assert_eq!(v["graph"]["radius"], 12);
}

#[test]
fn forced_tree_run_gets_past_the_growth_check() {
    let out = symbreak(&["pipeline", "--family", "tree:2", "--radius", "8", "--epsilon", "0.5", "--c", "1", "--force"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["forced"], true);
    assert_eq!(v["report"]["growth"]["pass"], false);
}

#[test]
fn lemma_check_flags_pendant_swap_from_a_synthetic_file() {
    let dir = tempfile::tempdir().unwrap();
    let desc = SyntheticDescription {
        sphere_sizes: vec![1, 1, 3, 3, 1, 1],
        edges: vec![[0, 1], [1, 2], [1, 3], [1, 4], [2, 5], [3, 6], [4, 7], [5, 8], [8, 9]],
    };
    let path = dir.path().join("pendants.json");
    std::fs::write(&path, serde_json::to_string(&desc).unwrap()).unwrap();
    let report = dir.path().join("lemma.json");
    let family = format!("synthetic:{}", path.display());
    let out = symbreak(&["lemma-check", "--family", &family, "--radius", "5", "--report", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&report);
    assert_eq!(v["report"]["stabilizer_order"], 2);
    assert!(v["report"]["violations"].as_u64().unwrap() > 0);
    assert!(!v["report"]["sphere_action"]["propagation_violations"].as_array().unwrap().is_empty());
    assert!(v["report"]["components_not_touching_outer"].as_u64().unwrap() > 0);
}

#[test]
fn graph_files_are_truncated_to_the_requested_radius() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ladder.json");
    generate(&FamilySpec::TwoWayLadder, 12).unwrap().write(&path).unwrap();
    let family = format!("graph:{}", path.display());
    let out = symbreak(&["lemma-check", "--family", &family, "--radius", "8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["graph"]["radius"], 8);
    assert_eq!(v["report"]["violations"], 0);
    assert_eq!(v["report"]["witnesses_missing"], 0);

    let out = symbreak(&["lemma-check", "--family", &family, "--radius", "13"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ends_accepts_explicit_levels() {
    let out = symbreak(&["ends", "--family", "line", "--radius", "30", "--epsilon", "0.5", "--levels", "9,18,27"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["levels"], serde_json::json!([9, 18, 27]));
    assert_eq!(v["report"]["tree"]["levels"], serde_json::json!([9, 18, 27]));
    assert_eq!(v["report"]["chains"].as_array().unwrap().len(), 2);
}

#[test]
fn motion_lab_is_deterministic_and_consistent() {
    let args = ["motion-lab", "--seed", "5", "--instances", "40", "--max-points", "9", "--trials", "10"];
    let a = symbreak(&args);
    let b = symbreak(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let s = &v["report"]["summary"];
    assert_eq!(s["instances"], 40);
    assert_eq!(s["double_count_equal"], s["double_count_checked"]);
    assert_eq!(s["exhaustive_success"], s["bound_holds"]);
    let other = symbreak(&["motion-lab", "--seed", "6", "--instances", "40", "--max-points", "9"]);
    assert_ne!(a.stdout, other.stdout);
}
