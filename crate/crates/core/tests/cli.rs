use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn linkflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linkflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn estimate(report: &Value, id: &str) -> f64 {
    report["links"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["id"] == id)
        .unwrap()["estimate"]
        .as_f64()
        .unwrap()
}

#[test]
fn correct_toy_recovers_ground_truth() {
    let o = linkflow(&[
        "correct",
        "fixtures/toy-example1",
        "--format",
        "machine-readable",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let est: Vec<f64> = (1..=6).map(|j| estimate(&r, &j.to_string())).collect();
    assert_eq!(est, [300., 200., 300., 200., 300., 500.]);
    let diffs: Vec<f64> = r["links"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|l| l["difference"].as_f64())
        .collect();
    assert_eq!(diffs, [0., 0., 0., 0., -100.]);
}

#[test]
fn correct_i405_table() {
    let o = linkflow(&["correct", "fixtures/i405", "--round", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(estimate(&r, "13"), 124236.0);
    assert_eq!(estimate(&r, "17"), 113413.0);
}

#[test]
fn human_table_has_reference_columns() {
    let o = linkflow(&["correct", "i405"]);
    let text = stdout(&o);
    assert!(text.contains("Link  Observation  Estimation  Difference  Percentage Difference"));
    let line6 = text.lines().find(|l| l.starts_with("6 ")).unwrap();
    assert!(line6.ends_with("22.8%"), "{line6}");
    let line3 = text.lines().find(|l| l.starts_with("3 ")).unwrap();
    assert!(line3.contains("N/A"));
}

#[test]
fn oracle_solver_agrees_on_toy() {
    let o = linkflow(&["correct", "toy", "--oracle", "--format", "json"]);
    assert!(o.status.success());
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["solver"], "exact");
    assert_eq!(estimate(&r, "6"), 500.0);
}

#[test]
fn no_round_keeps_raw_values() {
    let o = linkflow(&["correct", "toy-example2", "--no-round", "--format", "json"]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["rounded"], false);
    assert!((estimate(&r, "3") - 303.0).abs() < 1e-6);
}

const UNSOLVABLE: &str = r#"{
  "format": "linkflow-network", "version": 1,
  "nodes": ["a", "b"],
  "links": [
    {"id": "1", "tail": null, "head": "a"},
    {"id": "2", "tail": "a", "head": "b"},
    {"id": "3", "tail": "b", "head": null},
    {"id": "4", "tail": "a", "head": null}
  ],
  "monitored": ["1"],
  "observed": {"1": 10}
}"#;

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unsolvable = write(dir.path(), "u.json", UNSOLVABLE);
    let o = linkflow(&["correct", &unsolvable]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unsolvable"));

    let bad = write(dir.path(), "bad.json", "{ \"format\": ");
    let o = linkflow(&["correct", &bad]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line"));

    let both_ext = UNSOLVABLE.replace(
        "{\"id\": \"4\", \"tail\": \"a\", \"head\": null}",
        "{\"id\": \"4\"}",
    );
    let p = write(dir.path(), "ext.json", &both_ext);
    assert_eq!(linkflow(&["correct", &p]).status.code(), Some(3));

    let negative = UNSOLVABLE.replace("\"1\": 10", "\"1\": -10");
    let p = write(dir.path(), "neg.json", &negative);
    assert_eq!(linkflow(&["correct", &p]).status.code(), Some(3));

    // link 3 of this network can only ever carry zero flow
    let dead_end = r#"{
      "format": "linkflow-network", "version": 1,
      "nodes": ["a", "b"],
      "links": [
        {"id": "1", "tail": null, "head": "a"},
        {"id": "2", "tail": "a", "head": null},
        {"id": "3", "tail": null, "head": "b"}
      ],
      "monitored": ["1", "2", "3"]
    }"#;
    let p = write(dir.path(), "dead.json", dead_end);
    let o = linkflow(&["recoverability", &p, "--subset", "3"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));

    let o = linkflow(&["recoverability", "toy", "--subset", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!linkflow(&["correct", "no-such-fixture"]).status.success());
}

#[test]
fn recoverability_reports() {
    let o = linkflow(&["recoverability", "fixtures/toy", "--subset", "6"]);
    let t = stdout(&o);
    assert!(t.contains("recoverability: 2 "), "{t}");
    assert!(t.contains("exact recovery certified: yes"));
    assert!(t.contains("stability constant lambda: 18"));

    let o = linkflow(&["recoverability", "fixtures/toy", "--subset", "1"]);
    assert!(stdout(&o).contains("exact recovery certified: no"));

    let o = linkflow(&[
        "recoverability",
        "fixtures/parallel",
        "--subset",
        "6,16",
        "--format",
        "json",
    ]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((r["value"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert_eq!(r["certified_exact_recovery"], true);

    let o = linkflow(&[
        "recoverability",
        "i405",
        "--subset",
        "6",
        "--no-oracle",
        "--format",
        "json",
    ]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["method"], "inverse-power");
    assert!((r["value"].as_f64().unwrap() - 2.0).abs() < 1e-4);
    assert!(r["oracle_value"].is_null());
}

#[test]
fn correction_report_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let rep = rep.to_str().unwrap();
    let o = linkflow(&[
        "correct",
        "toy-example2",
        "--format",
        "json",
        "--output",
        rep,
    ]);
    assert!(o.status.success());
    let o = linkflow(&["validate", rep, "--subset", "6", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["l1_error"], 12.0);
    assert_eq!(v["bound"]["lambda"], 18.0);
    assert_eq!(v["bound"]["noise_l1"], 6.0);
    assert_eq!(v["bound"]["holds"], true);

    let o = linkflow(&["correct", "parallel", "--format", "json", "--output", rep]);
    assert!(o.status.success());
    let o = linkflow(&["validate", rep, "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let links = v["links"].as_array().unwrap();
    for id in ["6", "16"] {
        let e = links.iter().find(|l| l["id"] == id).unwrap()["error"]
            .as_f64()
            .unwrap();
        assert!(e.abs() < 300.0, "link {id}: {e}");
    }
}

#[test]
fn validate_needs_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let rep = rep.to_str().unwrap();
    assert!(
        linkflow(&["correct", "i405", "--format", "json", "-o", rep])
            .status
            .success()
    );
    let o = linkflow(&["validate", rep]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ground truth"));
}

#[test]
fn generate_is_deterministic_and_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_owned();
    let args = |net: &str, truth: &str, seed: &str| {
        linkflow(&[
            "generate",
            "--seed",
            seed,
            "--nodes",
            "9",
            "--links",
            "18",
            "--corrupt",
            "2",
            "--output",
            net,
            "--truth",
            truth,
        ])
    };
    assert!(args(&p("a.json"), &p("a.truth.json"), "1").status.success());
    assert!(args(&p("b.json"), &p("b.truth.json"), "1").status.success());
    assert!(args(&p("c.json"), &p("c.truth.json"), "2").status.success());
    assert_eq!(
        fs::read(p("a.json")).unwrap(),
        fs::read(p("b.json")).unwrap()
    );
    assert_eq!(
        fs::read(p("a.truth.json")).unwrap(),
        fs::read(p("b.truth.json")).unwrap()
    );
    assert_ne!(
        fs::read(p("a.json")).unwrap(),
        fs::read(p("c.json")).unwrap()
    );

    let doc: Value = serde_json::from_str(&fs::read_to_string(p("a.json")).unwrap()).unwrap();
    assert_eq!(doc["monitored"].as_array().unwrap().len(), 15);

    let rep = p("r.json");
    let o = linkflow(&["correct", &p("a.json"), "--format", "json", "-o", &rep]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = linkflow(&["validate", &rep, "--truth", &p("a.truth.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("l1 error"));
}

#[test]
fn fixtures_listing_and_export() {
    let o = linkflow(&["fixtures"]);
    let t = stdout(&o);
    for name in ["toy-example1", "toy-example2", "parallel-highway", "i405"] {
        assert!(t.contains(name));
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fx");
    assert!(linkflow(&["fixtures", "--export", out.to_str().unwrap()])
        .status
        .success());
    let exported = out.join("i405.json");
    let o = linkflow(&["correct", exported.to_str().unwrap()]);
    assert!(o.status.success());
}
