use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn harsanyi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harsanyi")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = harsanyi(&all);
    let v = serde_json::from_str(stdout(&o).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (o.status.code().unwrap(), v)
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn unsat_exits_with_one() {
    let o = harsanyi(&["sat", "L[3/4] p1 & L[3/4] ~p1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "unsat");
}

#[test]
fn sat_reports_a_witness() {
    let (code, v) = json(&["sat", "L[1/2] p1 & L[1/2] ~p1"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"], "sat");
    assert_eq!(v["witness"]["brackets"]["p1"], "1/2");
    let (code, v) = json(&["sat", "--logic", "plus", "~p1 & L[1] p1"]);
    assert_eq!(code, 0);
    assert_eq!(v["witness"]["measure"], serde_json::json!(["0/1", "1/1"]));
}

#[test]
fn cardinality_prints_the_count() {
    let o = harsanyi(&["cardinality", "--q", "2", "--d", "1", "--w", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "10");
}

#[test]
fn bisim_counts_lists() {
    let o = harsanyi(&["bisim", "--horizon", "6", "--r", "1/1", "--list-length", "6", "--count"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "64");
    let o = harsanyi(&["--json", "bisim", "--horizon", "6", "--r", "1/1", "--list-length", "6"]);
    assert_eq!(stdout(&o).trim(), r#"{"horizon":6,"lists":{"consistent":64,"m":6},"r":"1/1"}"#);
    let (_, v) = json(&["bisim", "--horizon", "4", "--r", "1/2", "--lemma"]);
    assert_eq!(v["lemma"]["holds"], false);
}

#[test]
fn exit_codes_for_errors() {
    assert_eq!(harsanyi(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(harsanyi(&["parse", "L[3/2] p1"]).status.code(), Some(2));
    assert_eq!(harsanyi(&["sat", "L_2[1/2] p1"]).status.code(), Some(2));
    assert_eq!(harsanyi(&["bisim", "--horizon", "11"]).status.code(), Some(2));
    assert_eq!(harsanyi(&["cardinality", "--q", "3", "--d", "1", "--w", "2"]).status.code(), Some(3));
    assert_eq!(harsanyi(&["atoms", "--q", "9"]).status.code(), Some(3));
}

#[test]
fn valid_and_invalid() {
    assert_eq!(harsanyi(&["valid", "L[1/2] p1 -> L[1] L[1/2] p1"]).status.code(), Some(0));
    let (code, v) = json(&["valid", "L[1/2](p1 & p2) <-> (L[1/2] p1 & L[1/2] p2)"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"], "invalid");
}

#[test]
fn parse_and_denest() {
    let (code, v) = json(&["parse", "L[2/4](p1 ∧ ~p2) -> K_2 p1"]);
    assert_eq!(code, 0);
    assert_eq!(v["formula"], "L[1/2] (p1 & ~p2) -> K_2 p1");
    assert_eq!(v["depth"], 1);
    let o = harsanyi(&["denest", "L[1/2](p1 & L[1/3] p1)"]);
    assert_eq!(stdout(&o).trim(), "L[1/2] p1 & L[1/3] p1");
    assert_eq!(harsanyi(&["denest", "L[1/2](p1 | (p1 & L[0] p1))"]).status.code(), Some(1));
}

#[test]
fn canonical_model_round_trip_through_files() {
    let path = scratch("canonical_q2.json");
    let o = harsanyi(&["canonical", "--q", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (code, v) = json(&["check-model", path.to_str().unwrap(), "--formula", "L[1] p1", "--laws", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["states"], 10);
    assert_eq!(v["harsanyi"], serde_json::json!([true]));
    assert_eq!(v["laws"], serde_json::json!([]));
    assert_eq!(v["formulas"][0]["states"].as_array().unwrap().len(), 2);

    let kb = harsanyi(&["kb-extend", path.to_str().unwrap()]);
    assert_eq!(kb.status.code(), Some(0));
    let kb_path = scratch("canonical_q2_kb.json");
    std::fs::write(&kb_path, stdout(&kb)).unwrap();
    let (_, v) = json(&["check-model", kb_path.to_str().unwrap(), "--formula", "L[1/2] p1 -> K L[1/2] p1"]);
    assert_eq!(v["kb"], true);
    assert_eq!(v["formulas"][0]["states"].as_array().unwrap().len(), 10);
}

#[test]
fn non_harsanyi_models_are_refused() {
    let path = scratch("counter.json");
    std::fs::write(&path, r#"{"states":2,"agents":1,"kernels":[[["3/4","1/4"],["0/1","1/1"]]],"valuation":{"p1":[0]}}"#).unwrap();
    assert_eq!(harsanyi(&["kb-extend", path.to_str().unwrap()]).status.code(), Some(1));
    let (_, v) = json(&["check-model", path.to_str().unwrap(), "--laws", "2"]);
    assert_eq!(v["harsanyi"], serde_json::json!([false]));
    assert!(v["laws"].as_array().unwrap().iter().any(|l| l == "PositiveIntrospection"));
}

#[test]
fn algebra_reports() {
    let (code, v) = json(&["algebra"]);
    assert_eq!(code, 0);
    assert_eq!(v["elements"], 4);
    assert_eq!(v["laws"]["pass"], true);
    let export = harsanyi(&["algebra", "--export"]);
    let path = scratch("quotient.json");
    std::fs::write(&path, stdout(&export)).unwrap();
    let (_, w) = json(&["algebra", "--file", path.to_str().unwrap()]);
    assert_eq!(v, w);
}

#[test]
fn atoms_listing() {
    let o = harsanyi(&["atoms", "--q", "1"]);
    assert_eq!(stdout(&o).lines().count(), 6);
    let (_, v) = json(&["atoms", "--q", "2"]);
    assert_eq!(v.as_object().unwrap().len(), 10);
}

#[test]
fn identical_runs_are_identical() {
    let a = harsanyi(&["--json", "--threads", "2", "atoms", "--q", "2", "--letters", "2"]);
    let b = harsanyi(&["--json", "atoms", "--q", "2", "--letters", "2"]);
    assert_eq!(a.stdout, b.stdout);
}
