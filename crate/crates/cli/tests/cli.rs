use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn specshort(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specshort")).args(args).env_remove("SPECSHORT_TOL_PROFILE").output().unwrap()
}

fn write(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec(value).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

struct Files {
    _dir: TempDir,
    diag12: String,
    diag23: String,
    line: String,
    xi: String,
}

fn files() -> Files {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    Files {
        diag12: write(p, "a.json", &json!({ "n": 2, "data": [1.0, 0.0, 0.0, 2.0] })),
        diag23: write(p, "b.json", &json!({ "n": 2, "data": [2.0, 0.0, 0.0, 3.0] })),
        line: write(p, "s.json", &json!({ "n": 2, "basis": [[1.0, 1.0]] })),
        xi: write(p, "xi.json", &json!({ "n": 2, "xi": [1.0, 1.0] })),
        _dir: dir,
    }
}

#[test]
fn short_reports_four_thirds() {
    let f = files();
    for method in ["at", "schur", "both"] {
        let out = specshort(&["short", &f.diag12, &f.line, "--method", method]);
        assert_eq!(out.status.code(), Some(0));
        let data = report(&out)["sigma"]["data"].clone();
        assert!((data[0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-14, "{method}");
    }
}

#[test]
fn spectral_short_both_methods_agree() {
    let f = files();
    let out = specshort(&["spectral-short", &f.diag12, &f.line, "--method", "both"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["cross_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["levels"][0]["mu"].as_f64().unwrap(), 1.0);
    assert_eq!(r["levels"][0]["rank"], 1);
}

#[test]
fn kolmogorov_methods() {
    let f = files();
    let closed = report(&specshort(&["kolmogorov", &f.diag12, &f.xi]));
    assert_eq!(closed["value"], 2.0);
    assert!((closed["K"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-15);
    let power = report(&specshort(&["kolmogorov", &f.diag12, &f.xi, "--method", "power"]));
    assert!((power["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let dual = report(&specshort(&["kolmogorov", &f.diag12, &f.xi, "--method", "duality"]));
    assert!((dual["reciprocal_rho_pseudo_inverse"].as_f64().unwrap() - 2.0).abs() < 1e-14);

    let dir = tempfile::tempdir().unwrap();
    let singular = write(dir.path(), "z.json", &json!({ "n": 2, "data": [1.0, 0.0, 0.0, 0.0] }));
    let kernel = write(dir.path(), "k.json", &json!({ "n": 2, "xi": [0.0, 1.0] }));
    assert_eq!(report(&specshort(&["kolmogorov", &singular, &kernel]))["K"], "-inf");
}

#[test]
fn order_exit_codes() {
    let f = files();
    let holds = specshort(&["order", &f.diag12, &f.diag23]);
    assert_eq!(holds.status.code(), Some(0));
    assert_eq!(report(&holds)["holds"], true);
    let fails = specshort(&["order", &f.diag23, &f.diag12]);
    assert_eq!(fails.status.code(), Some(1));
    assert_eq!(report(&fails)["holds"], false);
}

#[test]
fn bad_matrices_exit_with_three() {
    let f = files();
    let dir = tempfile::tempdir().unwrap();
    let asym = write(dir.path(), "asym.json", &json!({ "n": 2, "data": [1.0, 0.5, 0.0, 1.0] }));
    let indefinite = write(dir.path(), "neg.json", &json!({ "n": 2, "data": [1.0, 0.0, 0.0, -1.0] }));
    assert_eq!(specshort(&["short", &asym, &f.line]).status.code(), Some(3));
    assert_eq!(specshort(&["short", &indefinite, &f.line]).status.code(), Some(3));
}

#[test]
fn malformed_input_exits_with_two() {
    let f = files();
    let dir = tempfile::tempdir().unwrap();
    let short_data = write(dir.path(), "short.json", &json!({ "n": 2, "data": [1.0, 0.0, 0.0] }));
    let zero = write(dir.path(), "zero.json", &json!({ "n": 2, "xi": [0.0, 0.0] }));
    let wrong_dim = write(dir.path(), "three.json", &json!({ "n": 3, "basis": [[1.0, 0.0, 0.0]] }));
    std::fs::write(dir.path().join("junk.json"), "{ not json").unwrap();
    let junk = dir.path().join("junk.json");
    assert_eq!(specshort(&["short", &short_data, &f.line]).status.code(), Some(2));
    assert_eq!(specshort(&["kolmogorov", &f.diag12, &zero]).status.code(), Some(2));
    assert_eq!(specshort(&["short", &f.diag12, &wrong_dim]).status.code(), Some(2));
    assert_eq!(specshort(&["short", junk.to_str().unwrap(), &f.line]).status.code(), Some(2));
    assert_eq!(specshort(&["short", "/nonexistent/a.json", &f.line]).status.code(), Some(2));
    assert_eq!(specshort(&["short", &f.diag12, &f.line, "--tol-profile", "lenient"]).status.code(), Some(2));
}

#[test]
fn verify_small_run_and_threshold_override() {
    let ok = specshort(&["verify", "--dims", "2,3", "--trials", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    let r = report(&ok);
    assert_eq!(r["total_failures"], 0);
    assert_eq!(r["dims"], json!([2, 3]));

    let strict = specshort(&["verify", "--dims", "3", "--trials", "2", "--threshold", "T1=0"]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(report(&strict)["theorems"][0]["failing_seed"].is_u64());
}

#[test]
fn out_flag_writes_the_report() {
    let f = files();
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = specshort(&["kolmogorov", &f.diag12, &f.xi, "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_slice(&std::fs::read(&target).unwrap()).unwrap();
    assert_eq!(written["value"], 2.0);
}

#[test]
fn tolerance_profile_from_environment() {
    let f = files();
    let out = Command::new(env!("CARGO_BIN_EXE_specshort"))
        .args(["short", &f.diag12, &f.line])
        .env("SPECSHORT_TOL_PROFILE", "strict")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_specshort"))
        .args(["short", &f.diag12, &f.line])
        .env("SPECSHORT_TOL_PROFILE", "nope")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
