use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    report: Option<Value>,
    stderr: String,
}

fn superquad(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_superquad"));
    cmd.args(args).env_remove("SUPERQUAD_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().expect("binary runs");
    let report = serde_json::from_slice(&stdout).ok();
    if let Some(r) = &report {
        check_schema(r);
    }
    Run {
        code: status.code().expect("exit code"),
        report,
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
    }
}

fn check_schema(report: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    if let Err(e) = jsonschema::validate(&schema, report) {
        panic!("report violates schema: {e}\n{report:#}");
    }
    for spectrum in report["eigenvalues"].as_object().unwrap().values() {
        let v: Vec<f64> = spectrum
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert!(v.windows(2).all(|w| w[0] >= w[1]), "not descending: {v:?}");
    }
}

fn matrix(dir: &TempDir, name: &str, rows: Value) -> String {
    let path: PathBuf = dir.path().join(format!("{name}.json"));
    std::fs::write(&path, json!({ "matrix": rows }).to_string()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn spectrum(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn thm21_reports_negated_bound_spectrum() {
    let dir = TempDir::new().unwrap();
    let a = matrix(&dir, "a", json!([[5, -1], [-1, 5]]));
    let b = matrix(&dir, "b", json!([[4, 1], [1, 5]]));
    let run = superquad(
        &[
            "bound",
            "--theorem",
            "thm21",
            "--f",
            "neg_pow_q:4/3",
            "--alpha",
            "0.5",
            "--a",
            &a,
            "--b",
            &b,
        ],
        &[],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = run.report.unwrap();
    let neg = spectrum(&report["ingredients"]["neg_bound"]);
    assert!(
        (neg[0] - 4.9944).abs() < 1e-3 && (neg[1] - 3.6099).abs() < 1e-3,
        "{neg:?}"
    );
    assert_eq!(report["verdicts"]["thm21"]["pass"], json!(true));
}

#[test]
fn power_mean_reverse_on_equal_scalar_inputs_is_tight() {
    let dir = TempDir::new().unwrap();
    let a = matrix(&dir, "a", json!([[3, 0], [0, 3]]));
    let run = superquad(
        &[
            "bound",
            "--theorem",
            "cor23",
            "--q",
            "1.5",
            "--a",
            &a,
            "--b",
            &a,
        ],
        &[],
    );
    assert_eq!(run.code, 0);
    let margin = run.report.unwrap()["verdicts"]["cor23"]["margin"]
        .as_f64()
        .unwrap();
    assert!(margin.abs() < 1e-9);
}

#[test]
fn printed_sandwich_correction_exits_with_counterexample() {
    let dir = TempDir::new().unwrap();
    let one = matrix(&dir, "one", json!([[1]]));
    let run = superquad(
        &[
            "bound",
            "--theorem",
            "sandwich",
            "--x",
            &one,
            "--y",
            &one,
            "--q",
            "2",
            "--variant",
            "paper",
        ],
        &[],
    );
    assert_eq!(run.code, 3);
    let report = run.report.unwrap();
    let ce = &report["counterexample"];
    assert_eq!(spectrum(&ce["upper_spectrum"]), vec![2.0]);
    assert_eq!(spectrum(&ce["lhs_spectrum"]), vec![4.0]);
    assert!(!report["erratum_notes"].as_array().unwrap().is_empty());

    let run = superquad(
        &[
            "bound",
            "--theorem",
            "sandwich",
            "--x",
            &one,
            "--y",
            &one,
            "--q",
            "2",
        ],
        &[],
    );
    assert_eq!(run.code, 0);
    assert_eq!(
        spectrum(&run.report.unwrap()["eigenvalues"]["upper"]),
        vec![10.0]
    );
}

#[test]
fn remaining_theorems_run_on_small_inputs() {
    let dir = TempDir::new().unwrap();
    let a = matrix(&dir, "a", json!([[6, 1], [1, 4]]));
    let b = matrix(&dir, "b", json!([[2, 0], [0, 1]]));
    let c = matrix(&dir, "c", json!([[0.5, 0.1], [0.0, 0.4]]));
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "--theorem",
            "cor22",
            "--f",
            "neg_pow_q:1.5",
            "--a",
            &a,
            "--b",
            &b,
        ],
        vec!["--theorem", "cor24", "--q", "1.5", "--a", &a, "--b", &b],
        vec![
            "--theorem",
            "thm25",
            "--f",
            "neg_pow_q:1.5",
            "--a",
            &a,
            "--alpha",
            "0.3",
        ],
        vec![
            "--theorem",
            "thm25",
            "--f",
            "neg_pow_q:1.5",
            "--a",
            &a,
            "--b",
            &b,
        ],
        vec![
            "--theorem",
            "thm29",
            "--f",
            "pow_p:3",
            "--a",
            &a,
            "--b",
            &b,
            "--alpha",
            "0.25",
        ],
        vec![
            "--theorem",
            "cor210",
            "--f",
            "pow_p:2",
            "--a",
            &a,
            "--b",
            &b,
        ],
        vec!["--theorem", "cor211", "--p", "2.5", "--a", &a, "--b", &b],
        vec![
            "--theorem",
            "dilation",
            "--f",
            "pow_p:2",
            "--x",
            &a,
            "--c",
            &c,
        ],
    ];
    for case in cases {
        let mut args = vec!["bound"];
        args.extend(case.iter().copied());
        let run = superquad(&args, &[]);
        assert_eq!(run.code, 0, "{args:?}: {}", run.stderr);
    }
}

#[test]
fn constants_examples() {
    let run = superquad(
        &[
            "constants",
            "--kind",
            "kantorovich",
            "--m",
            "1",
            "--M",
            "4",
            "--p",
            "2",
        ],
        &[],
    );
    assert_eq!(run.code, 0);
    let k = run.report.unwrap()["ingredients"]["kantorovich"]
        .as_f64()
        .unwrap();
    assert!((k - 1.5625).abs() <= 1e-12);

    let run = superquad(
        &[
            "constants",
            "--kind",
            "t0",
            "--g",
            "pow:2",
            "--m",
            "1",
            "--M",
            "4",
        ],
        &[],
    );
    let t0 = run.report.unwrap()["ingredients"]["t0"].as_f64().unwrap();
    assert!((t0 - 1.6).abs() <= 1e-12);

    let run = superquad(
        &[
            "constants",
            "--kind",
            "gamma",
            "--g",
            "pow:3",
            "--m",
            "2",
            "--M",
            "2",
        ],
        &[],
    );
    let report = run.report.unwrap();
    assert_eq!(report["ingredients"]["gamma"]["gamma"], json!(1.0));
    assert!(!report["erratum_notes"].as_array().unwrap().is_empty());

    let run = superquad(
        &[
            "constants",
            "--kind",
            "secant",
            "--g",
            "pow:2",
            "--m",
            "1",
            "--M",
            "4",
        ],
        &[],
    );
    let ing = &run.report.unwrap()["ingredients"];
    assert!((ing["mu"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert!((ing["nu"].as_f64().unwrap() + 4.0).abs() < 1e-12);

    let run = superquad(
        &[
            "constants",
            "--kind",
            "gamma",
            "--g",
            "abs:pow_p:3",
            "--m",
            "-2",
            "--M",
            "1",
        ],
        &[],
    );
    assert_eq!(run.code, 0);
    let g = &run.report.unwrap()["ingredients"]["gamma"];
    assert_eq!(g["finite"], json!(false));
    assert_eq!(g["gamma_inverse"], json!(0.0));

    let run = superquad(
        &[
            "constants",
            "--kind",
            "kantorovich_abs",
            "--m",
            "-1",
            "--M",
            "1",
            "--p",
            "2",
        ],
        &[],
    );
    assert_eq!(run.code, 0);
    assert!(!run.report.unwrap()["erratum_notes"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let a = matrix(&dir, "a", json!([[2, 0], [0, 1]]));
    let a3 = matrix(&dir, "a3", json!([[1, 0, 0], [0, 1, 0], [0, 0, 1]]));
    let skew = matrix(&dir, "skew", json!([[1, 0.5], [0, 1]]));
    let missing = dir.path().join("nope.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["bound", "--theorem", "thm99"],
        vec![
            "bound",
            "--theorem",
            "thm21",
            "--f",
            "bogus:1",
            "--a",
            &a,
            "--b",
            &a,
        ],
        vec![
            "bound",
            "--theorem",
            "thm21",
            "--f",
            "neg_pow_q:1.5",
            "--a",
            &a,
            "--b",
            &a3,
        ],
        vec![
            "bound",
            "--theorem",
            "thm21",
            "--f",
            "neg_pow_q:1.5",
            "--a",
            &a,
        ],
        vec![
            "bound",
            "--theorem",
            "thm21",
            "--f",
            "neg_pow_q:1.5",
            "--a",
            &skew,
            "--b",
            &a,
        ],
        vec![
            "bound",
            "--theorem",
            "cor23",
            "--q",
            "3",
            "--a",
            &a,
            "--b",
            &a,
        ],
        vec![
            "bound",
            "--theorem",
            "thm21",
            "--f",
            "neg_pow_q:1.5",
            "--a",
            missing.to_str().unwrap(),
            "--b",
            &a,
        ],
        vec![
            "constants",
            "--kind",
            "kantorovich",
            "--m",
            "1",
            "--M",
            "4",
            "--p",
            "0.5",
        ],
        vec![
            "constants",
            "--kind",
            "t0",
            "--g",
            "pow:2",
            "--m",
            "3",
            "--M",
            "1",
        ],
        vec!["verify", "--trials", "0"],
        vec!["verify", "--dims", "2", "--checks", "nothing"],
    ];
    for args in cases {
        let run = superquad(&args, &[]);
        assert_eq!(run.code, 2, "{args:?}");
        assert!(run.report.is_none());
        assert!(!run.stderr.is_empty());
    }
    let run = superquad(&["reproduce"], &[("SUPERQUAD_TOL", "tight")]);
    assert_eq!(run.code, 2);
}

#[test]
fn near_symmetric_input_is_symmetrized_with_warning() {
    let dir = TempDir::new().unwrap();
    let a = matrix(&dir, "a", json!([[2.0, 1e-12], [0.0, 1.0]]));
    let run = superquad(
        &[
            "bound",
            "--theorem",
            "cor24",
            "--q",
            "1.5",
            "--a",
            &a,
            "--b",
            &a,
        ],
        &[],
    );
    assert_eq!(run.code, 0);
    assert_eq!(run.report.unwrap()["warnings"].as_array().unwrap().len(), 2);
}

#[test]
fn tolerance_override_is_echoed() {
    let dir = TempDir::new().unwrap();
    let a = matrix(&dir, "a", json!([[2, 0], [0, 1]]));
    let run = superquad(
        &[
            "bound",
            "--theorem",
            "cor24",
            "--q",
            "1.5",
            "--a",
            &a,
            "--b",
            &a,
        ],
        &[("SUPERQUAD_TOL", "0.001")],
    );
    assert_eq!(
        run.report.unwrap()["inputs"]["tolerance"]["atol"],
        json!(0.001)
    );
}

#[test]
fn verify_is_deterministic_and_written_to_out() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let args = [
        "verify",
        "--seed",
        "9",
        "--trials",
        "25",
        "--dims",
        "2,3",
        "--out",
        out.to_str().unwrap(),
    ];
    let first = superquad(&args, &[]);
    assert_eq!(first.code, 0, "{}", first.stderr);
    let mut a = first.report.unwrap();
    let mut from_file: Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(a, from_file);
    let mut b = superquad(&args, &[]).report.unwrap();
    for v in [&mut a, &mut b, &mut from_file] {
        v["suite"]["wall_time"] = Value::Null;
    }
    assert_eq!(a, b);
    assert_eq!(a["inputs"]["master_seed"], json!(9));
    assert_eq!(a["suite"]["records"][0]["trials_run"], json!(25));
}

#[test]
fn verify_reads_config_file() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("suite.json");
    std::fs::write(
        &config,
        json!({"trials": 10, "dims": [1], "sandwich_q": [2.0], "checks": ["sandwich_paper", "sandwich_lower"]})
            .to_string(),
    )
    .unwrap();
    let run = superquad(&["verify", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = run.report.unwrap();
    assert_eq!(report["suite"]["records"].as_array().unwrap().len(), 2);
    assert!(!report["erratum_notes"].as_array().unwrap().is_empty());

    std::fs::write(&config, r#"{"trails": 10}"#).unwrap();
    assert_eq!(
        superquad(&["verify", "--config", config.to_str().unwrap()], &[]).code,
        2
    );
}

#[test]
fn reproduce_matches_printed_values() {
    let run = superquad(&["reproduce"], &[]);
    assert_eq!(run.code, 0);
    let report = run.report.unwrap();
    let targets = report["paper_targets"].as_array().unwrap();
    assert_eq!(targets.len(), 7);
    for t in targets {
        assert!(t["abs_error"].as_f64().unwrap() <= 1e-3, "{t}");
        assert!(t["path_agreement"].as_f64().unwrap() <= 1e-10, "{t}");
        let computed = spectrum(&t["computed"]);
        assert!(computed[0] >= computed[1]);
    }
}
