use std::path::Path;
use std::process::Command;

use holmgren_core::cli::RunReport;

fn holmgren(out: &Path, args: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_holmgren"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn holmgren")
        .status;
    status.code().expect("exit code")
}

fn report(out: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn factorize_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(holmgren(dir.path(), &["factorize3d"]), 0);
    let rep = report(dir.path());
    assert_eq!(rep.schema, "1");
    assert!(rep.pass);
    assert_eq!(rep.checks.len(), 4);
}

#[test]
fn unknown_field_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"a": 2.0, "b": 1.0, "colour": "red"}"#,
    );
    assert_eq!(
        holmgren(
            &dir.path().join("out"),
            &["schwarz", "ellipse", "--config", &cfg]
        ),
        2
    );
}

#[test]
fn malformed_json_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", "{not json");
    assert_eq!(
        holmgren(&dir.path().join("out"), &["quadcheck", "--config", &cfg]),
        2
    );
}

#[test]
fn degenerate_ellipse_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"a": 1.0, "b": -1.0}"#);
    assert_eq!(
        holmgren(
            &dir.path().join("out"),
            &["schwarz", "ellipse", "--config", &cfg]
        ),
        2
    );
}

#[test]
fn bad_dimension_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(holmgren(dir.path(), &["almansi", "--dim", "4"]), 2);
}

#[test]
fn tightened_tolerance_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        holmgren(
            dir.path(),
            &["kernel-verify", "--tol", "bilaplacian_max=1e-12"]
        ),
        1
    );
    let rep = report(dir.path());
    let check = rep
        .checks
        .iter()
        .find(|c| c.name == "bilaplacian_max")
        .unwrap();
    assert!(!check.verdict);
    assert_eq!(check.tolerance, 1e-12);
    assert!(rep.artifacts.iter().any(|a| a.ends_with(".csv")));
}

#[test]
fn reports_are_reproducible_apart_from_wall_time() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(
            holmgren(d.path(), &["almansi", "--dim", "3", "--seed", "7"]),
            0
        );
    }
    let ra = serde_json::to_string(&report(a.path()).without_wall_time()).unwrap();
    let rb = serde_json::to_string(&report(b.path()).without_wall_time()).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn arcflat_build_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"c": [0.3, 0.0], "atoms": 10}"#);
    let built = dir.path().join("built");
    assert_eq!(holmgren(&built, &["arcflat", "build", "--config", &cfg]), 0);
    let solution = built.join("arcflat_solution.json");
    assert!(solution.exists());
    let verified = dir.path().join("verified");
    assert_eq!(
        holmgren(
            &verified,
            &["arcflat", "verify", "--config", solution.to_str().unwrap()]
        ),
        0
    );
    assert!(report(&verified).pass);
}

#[test]
fn arcflat_verify_requires_a_solution() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(holmgren(dir.path(), &["arcflat", "verify"]), 2);
}
