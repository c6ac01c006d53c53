use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TRIANGLE: &str = "p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smoothopt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON document")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn without_timings(mut doc: Value) -> Value {
    doc.as_object_mut().unwrap().remove("timings");
    doc
}

#[test]
fn planted_triangle_reaches_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.graph", TRIANGLE);
    let doc = json(&run(&["maxcut", "--in", &tri, "--eps", "0.2", "--mode", "planted", "--oracle", "--seed", "1"]));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["result"]["ratio"], 1.0);
    assert_eq!(doc["result"]["value"], 2.0);
    assert_eq!(doc["config"]["planted_source"], "oracle");
}

#[test]
fn generated_ksat_has_expected_clause_count_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.cnf");
    let p = path.to_str().unwrap();
    let doc = json(&run(&["gen", "--family", "random-ksat", "--n", "14", "--k", "2", "--delta", "0.5", "--seed", "7", "--out", p]));
    assert_eq!(doc["instance"]["m"], 52);
    let text = fs::read_to_string(&path).unwrap();
    let f = smoothopt::csp::CnfFormula::parse_dimacs(&text).unwrap();
    assert_eq!(f.m(), 52);
    assert_eq!(f.to_dimacs(), text);
}

#[test]
fn planted_cut_sidecar_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.graph");
    let p = path.to_str().unwrap();
    json(&run(&["gen", "--family", "planted-cut", "--n", "12", "--delta", "0.6", "--seed", "2", "--out", p]));
    let text = fs::read_to_string(&path).unwrap();
    let g = smoothopt::Graph::parse_dimacs(&text).unwrap();
    assert_eq!(g.to_dimacs(), text);
    assert!(dir.path().join("g.graph.answer").exists());
    let doc = json(&run(&["maxcut", "--in", p, "--mode", "planted", "--oracle"]));
    assert_eq!(doc["config"]["planted_source"], "sidecar");
    assert!(doc["result"]["ratio"].as_f64().unwrap() >= 0.8);
}

#[test]
fn lemma_document_has_rates() {
    let doc = json(&run(&["lemmas", "--which", "sampling", "--n", "100", "--trials", "10000", "--seed", "3"]));
    assert!(doc["result"]["sampling"]["empirical_rate"].is_number());
    assert!(doc["result"]["rounding"].is_null());
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["maxcut", "--bogus"]).status.code(), Some(64));
    assert_eq!(run(&[]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.graph");
    assert_eq!(run(&["maxcut", "--in", missing.to_str().unwrap()]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.graph", "p edge 2 1\ne 1 3\n");
    let out = run(&["maxcut", "--in", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let path: String = (1..30).map(|i| format!("e {i} {}\n", i + 1)).collect();
    let long = write(dir.path(), "path.graph", &format!("p edge 30 29\n{path}"));
    assert_eq!(run(&["maxcut", "--in", &long, "--cap", "4"]).status.code(), Some(3));
    assert_eq!(run(&["maxcut", "--in", &long, "--eps", "2"]).status.code(), Some(3));
}

#[test]
fn reports_are_reproducible_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.graph");
    let p = path.to_str().unwrap();
    json(&run(&["gen", "--family", "graph-density", "--n", "14", "--delta", "0.7", "--seed", "4", "--out", p]));
    let args = |threads: &'static str| {
        vec!["maxcut", "--in", p, "--sample-size", "8", "--seed", "9", "--threads", threads, "--trials", "8"]
    };
    let a = without_timings(json(&run(&args("1"))));
    let b = without_timings(json(&run(&args("1"))));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let mut c = without_timings(json(&run(&args("4"))));
    c["config"]["threads"] = 1.into();
    assert_eq!(a, c);
}

#[test]
fn csv_export_is_one_header_and_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.graph", TRIANGLE);
    let out = run(&["maxcut", "--in", &tri, "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("result.value"));
}

#[test]
fn smooth_csp_kdense_and_oracle_commands() {
    let dir = tempfile::tempdir().unwrap();
    let poly = write(dir.path(), "p.poly", "p poly 3\nc 1\n2 1\n-3 2\n1 1 2 3\n");
    let doc = json(&run(&["smooth", "--in", &poly, "--oracle"]));
    assert_eq!(doc["result"]["value"], doc["result"]["oracle_value"]);

    let csp = write(dir.path(), "c.csp", "2 3 2\n1 2 : 6\n2 3 : 8\n");
    let doc = json(&run(&["csp", "--in", &csp, "--oracle"]));
    assert_eq!(doc["instance"]["kind"], "csp");
    assert_eq!(doc["result"]["csp"]["satisfied"], 2);

    let cnf = write(dir.path(), "f.cnf", "p cnf 3 2\n1 -2 0\n2 3 0\n");
    let doc = json(&run(&["csp", "--in", &cnf, "--oracle"]));
    assert_eq!(doc["result"]["csp"]["satisfied"], 2);

    let k4 = write(dir.path(), "k.graph", "p edge 5 4\ne 1 2\ne 2 3\ne 1 3\ne 4 5\n");
    let doc = json(&run(&["kdense", "--in", &k4, "--k", "3"]));
    assert_eq!(doc["result"]["kdense"]["edges"], 3);

    let doc = json(&run(&["oracle", "--problem", "kdense", "--in", &k4, "--k", "2"]));
    assert_eq!(doc["result"]["optimum"], 1.0);
    assert_eq!(run(&["oracle", "--problem", "kdense", "--in", &k4]).status.code(), Some(3));
}
