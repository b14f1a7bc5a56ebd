use std::path::PathBuf;
use std::process::{Command, Output};

use genlimit::harness::ReportDoc;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn genlimit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genlimit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, ReportDoc) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = genlimit(&all);
    let text = String::from_utf8(out.stdout).unwrap();
    (
        out.status.code().unwrap(),
        ReportDoc::from_json(&text).expect("json report"),
    )
}

#[test]
fn complexity_reports_table() {
    let (code, doc) = json(&["complexity", &data("blocks.json")]);
    assert_eq!(code, 0);
    let table = doc.table.unwrap();
    let m: Vec<u64> = table.entries.iter().map(|e| e.m_star).collect();
    assert_eq!(m, vec![0, 100, 0, 0, 0, 0, 0, 0]);
}

#[test]
fn complexity_text_lists_ordering() {
    let out = genlimit(&["complexity", &data("single.json")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ordering:"));
}

#[test]
fn noisy_cells_limit() {
    let (code, doc) = json(&[
        "complexity",
        &data("two_noisy.json"),
        "--noisy",
        "--cells",
        "5",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc.table.unwrap().entries.len(), 5);
}

#[test]
fn simulate_single_target() {
    let (code, doc) = json(&[
        "simulate",
        &data("blocks.json"),
        "--target",
        "2",
        "--attack",
        "canonical",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc.sim_reports.len(), 1);
    let r = &doc.sim_reports[0];
    assert_eq!((r.target, r.first_stable, r.bound), (2, 101, Some(101)));
    assert!(r.passed);
}

#[test]
fn simulate_cp_generator() {
    let (code, doc) = json(&[
        "simulate",
        &data("blocks.json"),
        "--target",
        "3",
        "--generator",
        "cp",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc.sim_reports[0].bound, Some(101));
}

#[test]
fn simulate_representative() {
    let (code, doc) = json(&[
        "simulate",
        &data("two_repr.json"),
        "--repr",
        "--alpha",
        "1/2",
        "--groups",
        &data("groups_two.json"),
        "--attack",
        "repr",
    ]);
    assert_eq!(code, 0);
    assert!(doc.sim_reports.iter().all(|r| r.linf_ok && r.passed));
}

#[test]
fn compare_verdicts() {
    let (code, doc) = json(&["compare", &data("blocks.json")]);
    assert_eq!(code, 0);
    let v = doc
        .verdicts
        .iter()
        .find(|v| v.a == "m*+1" && v.b == "cp-default")
        .unwrap();
    assert_eq!(format!("{:?}", v.verdict), "Dominates");
}

#[test]
fn verify_passes_on_corpus() {
    for args in [
        vec!["verify", "duplicate.json"],
        vec!["verify", "two_noisy.json", "--noisy"],
        vec!["verify", "blocks.json", "--mutation"],
    ] {
        let path = data(args[1]);
        let mut full = args.clone();
        full[1] = &path;
        let (code, doc) = json(&full);
        assert_eq!(code, 0, "{args:?}");
        assert!(doc.invariant_results.iter().all(|r| r.passed));
    }
}

#[test]
fn random_collection_argument() {
    let (code, doc) = json(&["verify", "random:5", "--seed", "7"]);
    assert_eq!(code, 0);
    assert!(!doc.invariant_results.is_empty());
}

#[test]
fn explicit_schedules() {
    for s in ["identity", "pow2"] {
        let out = genlimit(&["simulate", &data("single.json"), "--schedule", s]);
        assert!(out.status.code().is_some(), "{s}");
    }
}

#[test]
fn bad_input_exits_with_error() {
    let out = genlimit(&["complexity", "/nonexistent/c.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = genlimit(&["simulate", &data("single.json"), "--attack", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
    let out = genlimit(&["simulate", &data("two_repr.json"), "--repr"]);
    assert_eq!(out.status.code(), Some(2));
}
