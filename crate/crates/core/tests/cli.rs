//! The `preguss` binary: exit codes, flags, reports and SMT export.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use preguss::cli::validate_report;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn preguss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_preguss")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Run with `--report` into a temporary file and return exit code, stdout and report.
fn with_report(args: &[&str]) -> (i32, String, Value) {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let mut all = args.to_vec();
    all.extend(["--report", path(&report)]);
    let out = preguss(&all);
    let doc: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    validate_report(&doc).unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), doc)
}

#[test]
fn analyze_reports_alarms_in_the_exit_code() {
    let (code, stdout, doc) = with_report(&["analyze", path(&data("abs.c"))]);
    assert_eq!(code, 1);
    assert!(stdout.contains("assert"), "{stdout}");
    assert_eq!(doc["command"], "analyze");
    let alarms: Vec<&Value> = doc["programs"][0]["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["status"] == "Alarm")
        .collect();
    assert_eq!(alarms.len(), 1);
    assert_eq!(alarms[0]["line"], 3);

    let (code, _, _) = with_report(&["analyze", path(&data("safe.c"))]);
    assert_eq!(code, 0);
}

#[test]
fn run_exit_codes() {
    let (code, stdout, doc) = with_report(&["run", path(&data("abs.c"))]);
    assert_eq!(code, 1);
    assert!(stdout.contains("requires"), "{stdout}");
    let summary = &doc["programs"][0]["synthesis"]["summary"];
    assert_eq!(summary["certified"], 2);
    assert_eq!(summary["definitive_rte"], 1);

    for f in ["safe.c", "sum.c", "id.c"] {
        let (code, _, doc) = with_report(&["run", path(&data(f))]);
        assert_eq!(code, 0, "{f}");
        assert_eq!(doc["programs"][0]["synthesis"]["summary"]["high_risk_alert"], 0);
    }
}

#[test]
fn sum_gets_a_loop_invariant() {
    let out = preguss(&["run", path(&data("sum.c"))]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("loop invariant"), "{text}");
}

#[test]
fn input_errors_exit_with_2() {
    for (f, needle) in [("malformed.c", "1:27"), ("mutual.c", "recursive"), ("missing.c", "missing.c")] {
        let out = preguss(&["run", path(&data(f))]);
        assert_eq!(out.status.code(), Some(2), "{f}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{f}: {err}");
    }
}

#[test]
fn flag_validation() {
    for args in [
        vec!["run", "x.c", "--width", "12"],
        vec!["run", "x.c", "--max-iters", "0"],
        vec!["run", "x.c", "--generator", "gpt"],
        vec!["run"],
        vec!["export-smt", "x.c"],
    ] {
        assert_eq!(preguss(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_is_echoed() {
    let abs = data("abs.c");
    let (_, _, doc) = with_report(&[
        "run",
        path(&abs),
        "--width",
        "16",
        "--max-iters",
        "2",
        "--continue-on-alert",
        "--no-dependency-filter",
        "--save-transcripts",
    ]);
    let c = &doc["config"];
    assert_eq!(c["width"], 16);
    assert_eq!(c["max_iters"], 2);
    assert_eq!(c["continue_on_alert"], true);
    assert_eq!(c["dependency_filter"], false);
    assert_eq!(c["save_transcripts"], true);
    assert_eq!(c["generator"], "oracle");
    let program = &doc["programs"][0];
    assert_eq!(program["width"], 16);
    assert!(!program["synthesis"]["transcripts"].as_array().unwrap().is_empty());
    let alarm = program["assertions"].as_array().unwrap().iter().find(|a| a["status"] == "Alarm").unwrap();
    assert_eq!(alarm["predicate"], "-32767 <= x");
}

#[test]
fn dump_queue_prints_units_in_order() {
    let out = preguss(&["analyze", path(&data("abs.c")), "--dump-queue"]);
    let q: Value = serde_json::from_slice(&out.stdout).unwrap();
    let q = q.as_array().unwrap();
    assert_eq!(q.len(), 3);
    assert_eq!(q[0]["host"], "abs");
    assert_eq!(q[1]["slice"], serde_json::json!(["main", "abs"]));
    let priorities: Vec<u64> = q.iter().map(|u| u["priority"].as_u64().unwrap()).collect();
    assert_eq!(priorities, [0, 1, 2]);
}

#[test]
fn several_inputs_are_separate_programs() {
    let (code, _, doc) = with_report(&["run", path(&data("safe.c")), path(&data("abs.c"))]);
    assert_eq!(code, 1);
    assert_eq!(doc["programs"].as_array().unwrap().len(), 2);
}

#[test]
fn annotated_output_goes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("abs.annotated.c");
    let out = preguss(&["run", path(&data("abs.c")), "--annotated", path(&out_file)]);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_file).unwrap();
    assert!(text.contains("requires"), "{text}");
}

#[test]
fn export_smt() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("smt");
    let abs = data("abs.c");

    let none = preguss(&["export-smt", path(&abs), "--out", path(&out)]);
    assert_eq!(none.status.code(), Some(0));
    assert!(none.stdout.is_empty());
    assert!(!out.exists());

    let unknown = preguss(&["export-smt", path(&abs), "--out", path(&out), "--assertion", "ovf-n999"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("ovf-n999"));

    let all = preguss(&["export-smt", path(&abs), "--out", path(&out), "--all"]);
    assert_eq!(all.status.code(), Some(0));
    let files: Vec<PathBuf> = String::from_utf8(all.stdout).unwrap().lines().map(PathBuf::from).collect();
    assert_eq!(files.len(), 3);
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        assert!(text.starts_with(';'), "{text}");
        assert!(text.contains("(check-sat)"), "{text}");
        assert!(f.extension().unwrap() == "smt2");
    }
    let target = files.iter().find(|f| path(f).contains("ovf-")).unwrap();
    let text = std::fs::read_to_string(target).unwrap();
    assert!(text.contains("(set-logic QF_LIA)"), "{text}");
    assert!(text.contains("(declare-fun |x| () Int)"), "{text}");
    assert!(text.contains("(<= |x| 2147483647)"), "{text}");
}
