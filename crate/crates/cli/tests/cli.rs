use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kahler-audit"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn minkowski_audit_passes_with_text_report() {
    let out = run(&["audit", "minkowski"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("minkowski"), "{text}");
    assert!(text.trim_end().ends_with("result: PASS"), "{text}");
}

#[test]
fn catalog_list_has_one_line_per_builtin() {
    let a = run(&["catalog", "list"]);
    let b = run(&["catalog", "list"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 8, "{text}");
    for name in [
        "minkowski",
        "euclidean",
        "neutral_kahler_flat",
        "sphere4",
        "de_sitter",
        "flrw",
        "schwarzschild",
        "fubini_study",
    ] {
        assert!(
            text.lines().any(|l| l.starts_with(name)),
            "{name} missing:\n{text}"
        );
    }
}

#[test]
fn catalog_json_to_stdout_is_an_array() {
    let out = run(&["catalog", "list", "--json", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 8);
    let schwarzschild = items.iter().find(|i| i["name"] == "schwarzschild").unwrap();
    assert_eq!(schwarzschild["expected"]["conformally_flat"], false);
}

#[test]
fn de_sitter_json_report_values() {
    let out = run(&["audit", "de_sitter", "--points", "3", "--json", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["metric"], "de_sitter");
    assert_eq!(v["point_count"], 3);
    assert_eq!(v["passed"], true);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    for p in points {
        let near = |x: &Value, want: f64| (x.as_f64().unwrap() - want).abs() < 1e-7;
        assert!(near(&p["curvature"]["r"], 12.0));
        for k in p["sectional"]["k_spatial"]
            .as_array()
            .unwrap()
            .iter()
            .chain(p["sectional"]["k_timelike"].as_array().unwrap())
        {
            assert!(near(k, 1.0), "{k}");
        }
        assert!(near(&p["isotropy"]["a"], 1.0));
        assert!(near(&p["isotropy"]["b"], -1.0));
        assert_eq!(p["fluid"]["res_inflation"].as_f64(), Some(0.0));
    }
    for verdict in v["verdicts"].as_array().unwrap() {
        assert_ne!(verdict["status"], "fail", "{verdict}");
    }
}

#[test]
fn json_file_output_keeps_text_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["audit", "sphere4(2)", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("result: PASS"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v["points"][0]["curvature"]["r"].as_f64().unwrap() - 3.0).abs() < 1e-8);
}

#[test]
fn seeds_change_the_points() {
    let a: Value =
        serde_json::from_slice(&run(&["audit", "flrw", "--seed", "1", "--json", "-"]).stdout)
            .unwrap();
    let b: Value =
        serde_json::from_slice(&run(&["audit", "flrw", "--seed", "2", "--json", "-"]).stdout)
            .unwrap();
    assert_ne!(a["points"][0]["point"], b["points"][0]["point"]);
    assert_eq!(a["seed"], 1);
}

#[test]
fn wrong_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat_sphere.json");
    let mut entry = kahler_core::builtin("sphere4").unwrap();
    entry.expected.flat = Some(true);
    std::fs::write(&path, kahler_core::catalog::to_json(&entry)).unwrap();
    let out = run(&["audit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("result: FAIL"));
}

#[test]
fn input_errors_exit_two() {
    for args in [
        &["audit", "nosuch.json"][..],
        &["audit", "no_such_metric"],
        &["audit", "minkowski", "--points", "many"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    let bad = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../metrics/bad_signature.json"
    );
    let out = run(&["audit", bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("signature mismatch"));
}

#[test]
fn malformed_metric_file_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    let domain = r#""domain": [[0,1],[0,1],[0,1],[0,1]]"#;
    std::fs::write(
        &path,
        format!(r#"{{"name": "x", "signature": [1,1,1,1], "metric": {{"0,0": "1 +"}}, {domain}}}"#),
    )
    .unwrap();
    let out = run(&["audit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(
        err.contains(r#"metric["0,0"]"#) && err.contains("offset"),
        "{err}"
    );

    std::fs::write(
        &path,
        r#"{"name": "x", "signature": [1,1,1,1], "metric": {"0,0": 5}}"#,
    )
    .unwrap();
    let out = run(&["audit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("schema error at line 1 column"), "{err}");
}
