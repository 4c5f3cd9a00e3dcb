//! End-to-end tests of the `fpt` binary: subcommand wiring, file formats,
//! exit codes, and output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fpt")
}

fn write_boundary(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn density_closed_form_linear() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "linear.json",
        r#"{"kind": "linear", "a": 1.0, "coefficients": [1.0]}"#,
    );
    let out = run(&[
        "density",
        "--boundary",
        b.to_str().unwrap(),
        "--method",
        "closed_form",
        "--s",
        "1.0",
        "--grid",
        "4,1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("s,phi,ci_low,ci_high,method"));
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("1.00000000e0,5.39909665e-2"), "{last}");
    assert!(last.ends_with("closed_form"));
}

#[test]
fn density_girsanov_matches_closed_form_for_linear() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "linear.json",
        r#"{"kind": "linear", "a": 1.0, "coefficients": [1.0]}"#,
    );
    let common = ["--boundary", b.to_str().unwrap(), "--s", "1.0", "--grid", "5,1"];
    let cf = run(&[&["density", "--method", "closed_form"], &common[..]].concat());
    let mc = run(&[
        &["density", "--method", "girsanov_mc", "--paths", "100", "--steps", "100"],
        &common[..],
    ]
    .concat());
    assert!(cf.status.success() && mc.status.success());
    // f'' = 0 makes the estimator zero-variance: the phi column is identical.
    let phis = |text: &str| -> Vec<String> {
        text.lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().to_string())
            .collect()
    };
    assert_eq!(phis(&stdout(&cf)), phis(&stdout(&mc)));
}

#[test]
fn density_heat_pde_constant_boundary_matches_level_density() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "level.json",
        r#"{"kind": "linear", "a": 1.0, "coefficients": []}"#,
    );
    let out = run(&[
        "density",
        "--boundary",
        b.to_str().unwrap(),
        "--method",
        "heat_pde",
        "--t-max",
        "1.0",
        "--grid",
        "1000,1000",
    ]);
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let mut fields = line.split(',');
        let s: f64 = fields.next().unwrap().parse().unwrap();
        let phi: f64 = fields.next().unwrap().parse().unwrap();
        if s >= 0.2 {
            let exact = fpt_core::kernels::level_hitting_density(s, 1.0).unwrap();
            assert!(
                (phi - exact).abs() / exact <= 0.01,
                "phi({s}) = {phi} vs {exact}"
            );
        }
    }
}

#[test]
fn density_json_format_carries_schema_version() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "linear.json",
        r#"{"kind": "linear", "a": 1.0, "coefficients": [1.0]}"#,
    );
    let out = run(&[
        "density",
        "--boundary",
        b.to_str().unwrap(),
        "--method",
        "closed_form",
        "--s",
        "1.0",
        "--grid",
        "3,1",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["method"], "closed_form");
    assert_eq!(doc["phi"].as_array().unwrap().len(), 3);
}

#[test]
fn bridge_moments_match_exact_means() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "quad.json",
        r#"{"kind": "quadratic", "a": 1.0, "coefficients": [0.0, 0.5]}"#,
    );
    let out = run(&[
        "bridge",
        "--boundary",
        b.to_str().unwrap(),
        "--s",
        "1.0",
        "--paths",
        "4000",
        "--steps",
        "200",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("u,mean,std_error,mean_exact,ks_stat,ks_p"));
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (mean, se, exact, ks_p) = (f[1], f[2], f[3], f[5]);
        assert!((mean - exact).abs() <= 3.0 * se, "{line}");
        assert!(ks_p > 0.01, "{line}");
    }
}

#[test]
fn bridge_path_dump_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "quad.json",
        r#"{"kind": "quadratic", "a": 1.0, "coefficients": [0.0, 0.5]}"#,
    );
    let out1 = dir.path().join("p1.csv");
    let out2 = dir.path().join("p2.csv");
    for out in [&out1, &out2] {
        let st = run(&[
            "bridge",
            "--boundary",
            b.to_str().unwrap(),
            "--s",
            "1.0",
            "--mode",
            "paths",
            "--paths",
            "3",
            "--steps",
            "16",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(st.status.success());
    }
    let text1 = std::fs::read_to_string(&out1).unwrap();
    assert!(text1.starts_with("path_id,t,x\n"));
    assert_eq!(text1.lines().count(), 1 + 3 * 17);
    // fixed seed twice: byte-identical files
    assert_eq!(text1, std::fs::read_to_string(&out2).unwrap());
}

#[test]
fn bridge_zero_paths_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "quad.json",
        r#"{"kind": "quadratic", "a": 1.0, "coefficients": [0.0, 0.5]}"#,
    );
    let out = run(&[
        "bridge",
        "--boundary",
        b.to_str().unwrap(),
        "--s",
        "1.0",
        "--paths",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_envelope_columns() {
    let dir = tempfile::tempdir().unwrap();
    let lin = write_boundary(
        dir.path(),
        "linear.json",
        r#"{"kind": "linear", "a": 1.0, "coefficients": [1.0]}"#,
    );
    let quad = write_boundary(
        dir.path(),
        "quad.json",
        r#"{"kind": "quadratic", "a": 1.0, "coefficients": [0.0, 0.5]}"#,
    );
    let out = run(&["bounds", "--boundary", lin.to_str().unwrap(), "--s", "1.0", "--grid", "4,1"]);
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[1], f[2], "linear boundary: lower == upper in {line}");
    }
    let out = run(&["bounds", "--boundary", quad.to_str().unwrap(), "--s", "1.0", "--grid", "4,1"]);
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(f[1] < f[2], "quadratic boundary: strict gap in {line}");
    }
}

#[test]
fn bounds_check_curve_brackets_girsanov_output() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "quad.json",
        r#"{"kind": "quadratic", "a": 1.0, "coefficients": [0.0, 0.5]}"#,
    );
    let curve = dir.path().join("curve.csv");
    let st = run(&[
        "density",
        "--boundary",
        b.to_str().unwrap(),
        "--method",
        "girsanov_mc",
        "--s",
        "1.0",
        "--grid",
        "8,1",
        "--paths",
        "20000",
        "--steps",
        "300",
        "--out",
        curve.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let st = run(&[
        "bounds",
        "--boundary",
        b.to_str().unwrap(),
        "--s",
        "1.0",
        "--check-curve",
        curve.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));

    // A curve above the upper bound must fail the check with exit 1.
    std::fs::write(&curve, "s,phi,ci_low,ci_high,method\n1.0,0.5,,,closed_form\n").unwrap();
    let st = run(&[
        "bounds",
        "--boundary",
        b.to_str().unwrap(),
        "--s",
        "1.0",
        "--check-curve",
        curve.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(1));
}

#[test]
fn validate_passes_on_linear_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "linear.json",
        r#"{"kind": "linear", "a": 1.0, "coefficients": [1.0]}"#,
    );
    let report = dir.path().join("report.json");
    let st = run(&[
        "validate",
        "--boundary",
        b.to_str().unwrap(),
        "--s",
        "1.0",
        "--paths",
        "8000",
        "--steps",
        "300",
        "--grid",
        "400,400",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["all_passed"], true);
    let checks = doc["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["check_name"] == "linear_zero_variance_exact"));
    for check in checks {
        assert_eq!(check["status"], "pass", "{check}");
    }
}

#[test]
fn non_convex_boundary_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "concave.json",
        r#"{"kind": "quadratic", "a": 1.0, "coefficients": [0.0, -0.5]}"#,
    );
    let out_path = dir.path().join("never.csv");
    let out = Command::new(bin())
        .args([
            "validate",
            "--boundary",
            b.to_str().unwrap(),
            "--s",
            "1.0",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("NonConvexBoundary"), "{err}");
    // Config errors never produce partial output files.
    assert!(!out_path.exists());
}

#[test]
fn unknown_method_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "linear.json",
        r#"{"kind": "linear", "a": 1.0, "coefficients": [1.0]}"#,
    );
    let out = run(&[
        "density",
        "--boundary",
        b.to_str().unwrap(),
        "--method",
        "psychic",
        "--s",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "density",
        "--boundary",
        "/nonexistent/boundary.json",
        "--method",
        "closed_form",
        "--s",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // missing horizon flag
    let out = run(&["density", "--boundary", b.to_str().unwrap(), "--method", "closed_form"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn closed_form_on_curved_boundary_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_boundary(
        dir.path(),
        "quad.json",
        r#"{"kind": "quadratic", "a": 1.0, "coefficients": [0.0, 0.5]}"#,
    );
    let out = run(&[
        "density",
        "--boundary",
        b.to_str().unwrap(),
        "--method",
        "closed_form",
        "--s",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tabulated_boundary_accepted_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let knots: Vec<String> = (0..=20)
        .map(|i| {
            let t = i as f64 * 0.1;
            format!("[{t}, {}]", 1.0 + 0.5 * t * t)
        })
        .collect();
    let b = write_boundary(
        dir.path(),
        "tab.json",
        &format!(r#"{{"kind": "tabulated", "a": 1.0, "knots": [{}]}}"#, knots.join(", ")),
    );
    let out = run(&[
        "density",
        "--boundary",
        b.to_str().unwrap(),
        "--method",
        "girsanov_mc",
        "--s",
        "1.0",
        "--grid",
        "2,1",
        "--paths",
        "5000",
        "--steps",
        "200",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // Interpolated curvature stays close to the generator's f'' = 1, so the
    // density should land near the quadratic-boundary value at s = 1.
    let text = stdout(&out);
    let phi: f64 = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((phi - 0.0912).abs() / 0.0912 < 0.05, "phi = {phi}");
}
