use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use kgframe::{AlgebraShape, Frame64, GFrame, GaussianStream, Operator64, Tolerances};
use kgframe_cli::document::InstanceDocument;
use kgframe_cli::{dual, DualOutcome, EXIT_AUDIT, EXIT_INPUT, EXIT_OK, EXIT_PREDICATE};
use serde_json::Value;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn kgframe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgframe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn check_ci1_reports_bounds_and_lower_c() {
    let out = kgframe(&["check", &data("ci1_k.json")]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let r = json(&out);
    assert!((r["g_frame"]["lower"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((r["g_frame"]["upper"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!((r["k_g_frame"]["lower_c"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert_eq!(r["holds"], Value::Bool(true));
}

#[test]
fn check_without_k_is_a_g_frame_check() {
    let out = kgframe(&["check", &data("ci1.json")]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(json(&out).get("k_g_frame").is_none());
}

#[test]
fn require_tight_fails_on_ci1() {
    let out = kgframe(&["check", "--require-tight", &data("ci1_identity.json")]);
    assert_eq!(out.status.code(), Some(EXIT_PREDICATE));
    assert_eq!(json(&out)["tightness"]["tight"], Value::Bool(false));
}

#[test]
fn bad_block_names_the_field() {
    let out = kgframe(&["check", &data("bad_block.json")]);
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("frame[1]"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_are_input_errors() {
    assert_eq!(kgframe(&["check", "/nonexistent.json"]).status.code(), Some(EXIT_INPUT));
    assert_eq!(kgframe(&["verify", "--trials", "x"]).status.code(), Some(EXIT_INPUT));
    assert_eq!(kgframe(&["verify", "--theorems", "nope"]).status.code(), Some(EXIT_INPUT));
    assert_eq!(kgframe(&["verify", "--max-dims", "4,3"]).status.code(), Some(EXIT_INPUT));
}

#[test]
fn dual_refuses_non_kg_frame() {
    let out = kgframe(&["dual", &data("not_kg.json")]);
    assert_eq!(out.status.code(), Some(EXIT_PREDICATE));
    assert_eq!(json(&out)["refused"], Value::Bool(true));
}

#[test]
fn dual_output_rechecks() {
    let path = scratch("ci1_dual.json");
    let out = kgframe(&["dual", &data("ci1_k.json"), "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let out = kgframe(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let r = json(&out);
    assert_eq!(r["dual"]["is_dual"], Value::Bool(true));
    assert!(r["dual"]["residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn coordinate_frame_dual_is_basis_times_k() {
    let tol = Tolerances::default();
    let shape = AlgebraShape::new(&[2, 1]).unwrap();
    let e: Frame64 = GFrame::canonical_g_orthonormal_basis(&shape, &[1, 2], 3).unwrap();
    let k: Operator64 = GaussianStream::new(11).invertible_operator(&shape, 3);
    let mut ops = BTreeMap::new();
    ops.insert("K".to_string(), k.clone());
    let inst = InstanceDocument::encode(&e, &ops, None, None).decode().unwrap();
    let DualOutcome::Constructed(doc) = dual(&inst, &tol).unwrap() else {
        panic!("coordinate frame is a K-g-frame");
    };
    let xi = doc.decode().unwrap().dual.unwrap();
    let expected = e.compose_right(&k).unwrap();
    assert!(xi.distance(&expected).unwrap() < 1e-10);
}

#[test]
fn documents_round_trip() {
    let text = std::fs::read_to_string(data("ci1_k.json")).unwrap();
    let doc = InstanceDocument::parse(&text).unwrap();
    let again = InstanceDocument::parse(&doc.to_json()).unwrap();
    assert_eq!(doc.to_json(), again.to_json());
    let inst = again.decode().unwrap();
    let re = InstanceDocument::encode(&inst.frame, &inst.operators, None, None);
    assert_eq!(re.to_json(), doc.to_json());
}

#[test]
fn unknown_fields_are_rejected() {
    let text = std::fs::read_to_string(data("ci1.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["extra"] = Value::Bool(true);
    assert!(InstanceDocument::parse(&v.to_string()).is_err());
}

#[test]
fn verify_with_zero_trials_is_clean() {
    let out = kgframe(&["verify", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let r = json(&out);
    assert!(r.get("wall_time_s").is_none());
    assert_eq!(r["suite"]["reports"].as_array().unwrap().len(), 22);
}

#[test]
fn verify_single_theorem() {
    let out = kgframe(&["verify", "--trials", "5", "--theorems", "douglas", "--timing"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let r = json(&out);
    let reports = r["suite"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["theorem_id"], "douglas");
    assert_eq!(reports[0]["trials"], 5);
    assert!(r["wall_time_s"].as_f64().is_some());
}

#[test]
fn injected_fault_is_reported() {
    let out = kgframe(&[
        "verify",
        "--trials",
        "4",
        "--theorems",
        "canonical_dual",
        "--inject-fault",
        "canonical_dual:2",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_PREDICATE));
    let r = json(&out);
    let failures = r["suite"]["reports"][0]["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0]["trial"], 2);
    assert_eq!(failures[0]["injected"], true);
}

#[test]
fn audited_theorem_exits_three() {
    let out = kgframe(&["verify", "--trials", "20", "--seed", "3", "--theorems", "resolution"]);
    let r = json(&out);
    let t = &r["suite"]["reports"][0];
    let findings = t["audit_findings"].as_array().unwrap().len();
    let expected = if findings > 0 { EXIT_AUDIT } else { EXIT_OK };
    assert_eq!(out.status.code(), Some(expected));
}
