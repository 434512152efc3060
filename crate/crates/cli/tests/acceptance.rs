//! Exit gate: one PASS/FAIL line per acceptance criterion. Runs without the
//! libtest harness so the lines always reach the terminal.

use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;
use superquad_cli::commands::reproduce;
use superquad_core::bounds::{concave_bound_s, cor_sum_lower, subadditivity_sandwich, Variant};
use superquad_core::constants::{
    gamma_constant, kantorovich_abs_power, kantorovich_power, solve_t0, Power,
};
use superquad_core::harness::{run_suite, trial_seed, SuiteConfig, SuiteReport};
use superquad_core::linalg::eigenvalues;
use superquad_core::scalar::{jensen_gap_scalar, superquadratic_gap};
use superquad_core::{ComparisonTolerance, ScalarFunctionModel, SymmetricMatrix};

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: impl Into<String>) -> Line {
    Line {
        pass,
        detail: detail.into(),
    }
}

fn only(checks: &[&str]) -> SuiteConfig {
    SuiteConfig {
        checks: Some(checks.iter().map(|s| s.to_string()).collect()),
        ..SuiteConfig::default()
    }
}

/// Every named record ran its full budget with no failures and no skips.
fn clean(report: &SuiteReport, names: &[(&str, usize)]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, budget) in names {
        match report.record(name) {
            Some(r) => {
                ok &= r.fail_count == 0 && r.trials_run == *budget && r.skipped == 0;
                parts.push(format!(
                    "{name} {}/{} pass, worst margin/scale {:.3e}",
                    r.pass_count,
                    r.trials_run,
                    r.worst_margin.unwrap_or(f64::NAN)
                ));
            }
            None => {
                ok = false;
                parts.push(format!("{name} missing"));
            }
        }
    }
    (ok, parts.join("; "))
}

fn criterion_1_and_2() -> (Line, Line) {
    let start = Instant::now();
    let (doc, code) = reproduce().expect("reproduce runs");
    let elapsed = start.elapsed();
    let targets = |prefix: &str| {
        doc.paper_targets
            .iter()
            .filter(|t| t.name.starts_with(prefix))
            .collect::<Vec<_>>()
    };
    let worst = |ts: &[&superquad_cli::report::PaperTarget]| {
        ts.iter().map(|t| t.abs_error).fold(0.0, f64::max)
    };
    let set_q = targets("q3_2_");
    let one = line(
        set_q.len() == 3 && set_q.iter().all(|t| t.pass) && elapsed < Duration::from_secs(1),
        format!(
            "example set q=3/2: 3 tuples, max abs error {:.2e}, runtime {:.3}s",
            worst(&set_q),
            elapsed.as_secs_f64()
        ),
    );
    let mut remark: Vec<_> = targets("set1_");
    remark.extend(targets("set2_"));
    let narration = [
        "set1_tighter_matches_narration",
        "set2_tighter_matches_narration",
    ]
    .iter()
    .all(|k| doc.verdicts.get(*k).is_some_and(|v| v.pass));
    let two = line(
        remark.len() == 4 && remark.iter().all(|t| t.pass) && narration && code == 0,
        format!(
            "q=4/3 sets: 4 tuples, max abs error {:.2e}; thm25 tighter on set 1, thm21 on set 2: {}",
            worst(&remark),
            narration
        ),
    );
    (one, two)
}

fn criterion_3() -> Line {
    let start = Instant::now();
    let report = run_suite(&only(&["thm21"])).expect("suite runs");
    let elapsed = start.elapsed();
    let (ok, detail) = clean(&report, &[("thm21", 500)]);
    let tol_ok = report.config.tolerance == ComparisonTolerance::relative(1e-8);
    line(
        ok && tol_ok && elapsed < Duration::from_secs(30),
        format!("{detail}; runtime {:.2}s", elapsed.as_secs_f64()),
    )
}

fn criterion_4(full: &SuiteReport) -> Line {
    let (ok, detail) = clean(full, &[("thm25", 500)]);
    line(ok, detail)
}

fn criterion_5(full: &SuiteReport) -> Line {
    let (ok, detail) = clean(full, &[("thm29", 500)]);
    let r = full.record("thm29").expect("thm29 ran");
    let get = |k: &str| r.extras.get(k).copied().unwrap_or(f64::NAN);
    let (count, min_gamma, ratio) = (
        get("finite_gamma_count"),
        get("min_finite_gamma"),
        get("max_residual_ratio"),
    );
    line(
        ok && count > 0.0 && min_gamma >= 1.0 - 1e-9 && ratio <= 1.0,
        format!(
            "{detail}; {count} finite gamma values, min {min_gamma:.6}, \
             t0 residual at most {ratio:.2e} of its 1e-12 relative bound"
        ),
    )
}

fn unit_interval(seed: u64) -> f64 {
    (seed >> 11) as f64 / (1u64 << 53) as f64
}

fn criterion_6() -> Line {
    let mut worst = 0f64;
    for p in [2.0, 2.5, 3.0, 4.0] {
        for i in 0..20 {
            let m = 0.01 + 5.0 * unit_interval(trial_seed(6, "m", i));
            let big_m = m + 0.01 + 10.0 * unit_interval(trial_seed(6, "w", i));
            let printed = kantorovich_abs_power(m, big_m, p).expect("printed form");
            let sharp = gamma_constant(&Power::new(p), m, big_m)
                .expect("sharp form")
                .gamma;
            worst = worst.max((printed - sharp).abs() / sharp.abs());
        }
    }
    let k = kantorovich_power(1.0, 4.0, 2.0).expect("K(1,4,2)");
    let t0 = solve_t0(&Power::new(2.0), 1.0, 4.0).expect("t0");
    line(
        worst <= 1e-10 && (k - 1.5625).abs() <= 1e-12 && (t0 - 1.6).abs() <= 1e-12,
        format!("80 intervals, max relative gap {worst:.2e}; K(1,4,2) = {k:.15}, t0 = {t0:.15}"),
    )
}

fn criterion_7() -> Line {
    let f = ScalarFunctionModel::square();
    let mut gap = 0f64;
    for i in 0..=50 {
        for j in 0..=50 {
            let (s, t) = (0.2 * i as f64, 0.2 * j as f64);
            gap = gap.max(superquadratic_gap(&f, s, t).unwrap().abs());
            for alpha in [0.0, 0.2, 0.5, 0.7, 1.0] {
                gap = gap.max(jensen_gap_scalar(&f, t, s, alpha).unwrap().abs());
            }
        }
    }
    let g = ScalarFunctionModel::neg_pow_q(2.0).unwrap();
    let tol = ComparisonTolerance::relative(1e-8);
    let mut scalar = 0f64;
    for (a, b) in [(1.0, 4.0), (2.5, 2.5), (0.3, 9.0), (7.0, 0.0)] {
        let (a, b) = (SymmetricMatrix::scalar(1, a), SymmetricMatrix::scalar(1, b));
        for alpha in [0.1, 0.5, 0.9] {
            let r = concave_bound_s(&g, &a, &b, alpha, tol).unwrap();
            scalar = scalar.max(r.verdict.margin.abs());
        }
        scalar = scalar.max(
            cor_sum_lower(&a, &b, 2.0, tol)
                .unwrap()
                .verdict
                .margin
                .abs(),
        );
    }
    line(
        gap <= 1e-12 && scalar <= 1e-10,
        format!(
            "t^2 scalar gaps at most {gap:.2e}; n=1 bounds with exponent 2 off by {scalar:.2e}"
        ),
    )
}

fn criterion_8(full: &SuiteReport) -> Line {
    let one = SymmetricMatrix::scalar(1, 1.0);
    let tol = ComparisonTolerance::relative(1e-8);
    let r = subadditivity_sandwich(&one, &one, 2.0, Variant::Paper, tol).unwrap();
    let upper = eigenvalues(&r.upper).unwrap()[0];
    let lhs = eigenvalues(&r.lhs).unwrap()[0];
    let counterexample =
        !r.upper_verdict.pass && (upper - 2.0).abs() < 1e-12 && (lhs - 4.0).abs() < 1e-12;

    let scalar_suite = run_suite(&SuiteConfig {
        dims: vec![1],
        sandwich_q: vec![2.0],
        trials: 20,
        ..only(&["sandwich_paper"])
    })
    .unwrap();
    let collected = scalar_suite
        .record("sandwich_paper")
        .is_some_and(|r| !r.counterexamples.is_empty() && !r.asserted);
    let (ok, detail) = clean(full, &[("sandwich_derived", 500), ("sandwich_lower", 500)]);
    line(
        counterexample && collected && ok,
        format!(
            "printed correction on x=y=[[1]], q=2: upper {upper} vs lhs {lhs} (fails as expected), \
             collected by the harness: {collected}; {detail}"
        ),
    )
}

fn criterion_9(full: &SuiteReport) -> Line {
    let (ok, detail) = clean(full, &[("unit_conjugation", 200), ("congruence", 200)]);
    let rel = full
        .record("congruence")
        .and_then(|r| r.extras.get("max_relative_residual").copied())
        .unwrap_or(f64::NAN);
    line(
        ok && rel <= 1e-10,
        format!("{detail}; congruence residual at most {rel:.2e} relative"),
    )
}

fn criterion_10(full: &SuiteReport) -> Line {
    let (ok, detail) = clean(
        full,
        &[
            ("eq_mp", 1000),
            ("eq_k", 1000),
            ("eq_kd", 1000),
            ("aj_p", 1000),
        ],
    );
    let tol_ok = full.config.preliminary_tolerance == ComparisonTolerance::relative(1e-9);
    line(ok && tol_ok, detail)
}

fn criterion_11(full: &SuiteReport) -> Line {
    let (ok, detail) = clean(full, &[("dilation", 100)]);
    let r = full.record("dilation").expect("dilation ran");
    let ident = [
        "max_abs_identity_residual",
        "max_midpoint_identity_residual",
    ]
    .iter()
    .map(|k| r.extras.get(*k).copied().unwrap_or(f64::NAN))
    .fold(0.0, f64::max);
    line(
        ok && ident <= 1e-9,
        format!("{detail}; block identities within {ident:.2e}"),
    )
}

fn verify_run() -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_superquad"))
        .args(["verify", "--seed", "42"])
        .env_remove("SUPERQUAD_TOL")
        .output()
        .expect("binary runs");
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut v: Value = serde_json::from_slice(&out.stdout).expect("json report");
    v["suite"]["wall_time"] = Value::Null;
    v
}

fn criterion_12() -> Line {
    let (a, b) = (verify_run(), verify_run());
    line(
        a == b && a["suite"]["passed"] == Value::Bool(true),
        "two `verify --seed 42` runs give identical reports apart from wall_time",
    )
}

fn main() {
    let (c1, c2) = criterion_1_and_2();
    let c3 = criterion_3();
    let full = run_suite(&SuiteConfig::default()).expect("default suite runs");
    let lines = [
        c1,
        c2,
        c3,
        criterion_4(&full),
        criterion_5(&full),
        criterion_6(),
        criterion_7(),
        criterion_8(&full),
        criterion_9(&full),
        criterion_10(&full),
        criterion_11(&full),
        criterion_12(),
    ];
    let mut failed = 0;
    for (i, l) in lines.iter().enumerate() {
        println!(
            "criterion {:>2}: {}  {}",
            i + 1,
            if l.pass { "PASS" } else { "FAIL" },
            l.detail
        );
        failed += usize::from(!l.pass);
    }
    println!(
        "acceptance: {} of {} criteria pass",
        lines.len() - failed,
        lines.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
