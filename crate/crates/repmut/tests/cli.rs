//! End-to-end checks of the command-line binary: output schemas, exit codes,
//! config-file precedence, and byte-level determinism.

use std::io::Write as _;
use std::process::{Command, Output};

fn repmut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repmut"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let start = text.find('{').expect("stdout contains JSON");
    serde_json::from_str(&text[start..]).expect("stdout JSON parses")
}

#[test]
fn fixed_points_reports_symmetric_roots() {
    let out = repmut(&["fixed-points", "--b1", "0.2", "--b2", "0.2", "--mu", "0.05"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["fixed_points"]["kind"], "ThreeReal");
    let points = v["fixed_points"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    let expected = [0.0669872981077807, 0.5, 0.9330127018922193];
    let stability = ["Stable", "Unstable", "Stable"];
    for (k, p) in points.iter().enumerate() {
        let loc = p["location"].as_f64().unwrap();
        assert!(
            (loc - expected[k]).abs() <= 1e-9,
            "root {k}: {loc} vs {}",
            expected[k]
        );
        assert_eq!(p["stability"], stability[k]);
    }
}

#[test]
fn invalid_mu_exits_with_validation_code() {
    let out = repmut(&["fixed-points", "--b1", "0.2", "--b2", "0.3", "--mu", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mu"), "stderr should name the field: {err}");
}

#[test]
fn bifurcation_reports_critical_mu_and_scan_table() {
    let out = repmut(&["bifurcation", "--b1", "0.2", "--b2", "0.2"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let first = text.lines().next().unwrap();
    let value: f64 = first
        .strip_prefix("critical_mu = ")
        .expect("leading critical_mu line")
        .parse()
        .unwrap();
    assert_eq!(value, 0.2);
    assert!(text.contains("mu,num_roots,a1,a2,a3_or_ahat"));

    let trivial = repmut(&["bifurcation", "--b1", "0", "--b2", "0"]);
    assert!(trivial.status.success());
    let text = String::from_utf8_lossy(&trivial.stdout);
    let value: f64 = text
        .lines()
        .next()
        .unwrap()
        .strip_prefix("critical_mu = ")
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(value, 0.25);
}

#[test]
fn simulate_is_byte_identical_across_reruns() {
    let args = [
        "simulate",
        "--preset",
        "figure1",
        "--horizon",
        "5",
        "--seed",
        "7",
    ];
    let a = repmut(&args);
    let b = repmut(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.starts_with("t,x,regime\n"));
    assert_eq!(text.lines().count(), 1 + 51);
}

#[test]
fn simulate_rejects_out_of_range_initial_state() {
    let out = repmut(&["simulate", "--preset", "figure1", "--x0", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x0"));
}

#[test]
fn occupation_rejects_zero_paths() {
    let out = repmut(&[
        "occupation",
        "--preset",
        "figure1",
        "--paths",
        "0",
        "--horizon",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("paths"));
}

#[test]
fn hitting_resolves_auto_threshold_tokens() {
    let out = repmut(&[
        "hitting",
        "--preset",
        "figure1",
        "--threshold",
        "auto-a1",
        "--direction",
        "from-left",
        "--x0",
        "0.01",
        "--paths",
        "50",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let threshold = v["spec"]["threshold"].as_f64().unwrap();
    assert!((threshold - 0.012655916).abs() <= 1e-6);
    assert_eq!(v["fraction_censored"].as_f64().unwrap(), 0.0);
    assert!(v["mean"].as_f64().unwrap() > 0.0);
}

#[test]
fn hitting_requires_direction() {
    let out = repmut(&[
        "hitting",
        "--preset",
        "figure1",
        "--threshold",
        "0.5",
        "--paths",
        "4",
        "--horizon",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("direction"));
}

#[test]
fn config_file_fields_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "[generator]\nq12 = 5.0").unwrap();
    drop(f);
    let base = [
        "ensemble",
        "--preset",
        "figure1",
        "--config",
        path.to_str().unwrap(),
        "--paths",
        "4",
        "--horizon",
        "2",
        "--sample-every",
        "1",
    ];
    let from_file = repmut(&base);
    assert!(from_file.status.success());
    let v = stdout_json(&from_file);
    assert_eq!(v["model"]["q"]["q12"].as_f64().unwrap(), 5.0);

    let mut with_flag = base.to_vec();
    with_flag.extend(["--q12", "12"]);
    let overridden = repmut(&with_flag);
    assert!(overridden.status.success());
    let v = stdout_json(&overridden);
    assert_eq!(v["model"]["q"]["q12"].as_f64().unwrap(), 12.0);
    let err = String::from_utf8_lossy(&overridden.stderr);
    assert!(err.contains("config: "), "merged config echo missing: {err}");
}

#[test]
fn unknown_preset_is_a_validation_error() {
    let out = repmut(&["ensemble", "--preset", "bogus", "--paths", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("preset"));
}

#[test]
fn malformed_config_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[game]\nb3 = 1.0\n").unwrap();
    let out = repmut(&[
        "ensemble",
        "--config",
        path.to_str().unwrap(),
        "--paths",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b3"));
}

#[test]
fn moments_accepts_repeated_exponents() {
    let out = repmut(&[
        "moments",
        "--preset",
        "figure1",
        "--p",
        "1",
        "--p",
        "4",
        "--paths",
        "4",
        "--horizon",
        "2",
        "--sample-every",
        "1",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["ps"], serde_json::json!([1.0, 4.0]));
    assert_eq!(v["mean"].as_array().unwrap().len(), 2);
    assert_eq!(v["mean"][0].as_array().unwrap().len(), 3);
}

#[test]
fn classify_labels_lower_starts_as_lower_basin() {
    let out = repmut(&[
        "classify",
        "--preset",
        "figure1",
        "--q12",
        "12",
        "--x0-grid",
        "0.2:0.3:0.05",
        "--paths",
        "10",
        "--horizon",
        "20",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for e in entries {
        assert_eq!(e["label"], "LowerBasin");
    }
}

#[test]
fn worker_flag_does_not_change_output() {
    let base = [
        "ensemble",
        "--preset",
        "figure1",
        "--paths",
        "8",
        "--horizon",
        "5",
    ];
    let mut one = base.to_vec();
    one.extend(["--workers", "1"]);
    let mut four = base.to_vec();
    four.extend(["--workers", "4"]);
    let a = repmut(&one);
    let b = repmut(&four);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
