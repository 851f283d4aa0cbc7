use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hypercontact"));
    c.env("HYPERCONTACT_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{"schema_version": 1, "n": 1, "k_max": 3,
            "pushout": {"samples_per_shell": 50, "identity_samples": 200, "escape_samples": 30,
                        "omega_samples": 10, "pullback_samples": 10}}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_prints_the_normalized_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = run(&["validate", &cfg]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["i_max"], 6);
    assert_eq!(v["obstacle"]["heights"][0], 16.0);
}

#[test]
fn validate_reports_positions_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"n\": 1,\n  \"k_max\": }").unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    fs::write(&bad, r#"{"n": 1, "pushout": {"schedule": "explicit", "a": [2, 3], "b": [4, 8], "c": [1, 1]}, "i_max": 2}"#).unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("index 2"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn pushout_run_writes_reproducible_artifacts_and_classifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run(&["run", "--suite", "pushout", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let csv_a = fs::read(a.join("orbits.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("orbits.csv")).unwrap());
    assert!(String::from_utf8_lossy(&csv_a).starts_with("index,z1_re,z1_im,z2_re,z2_im,round,log_magnitude,classification"));

    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["failed"], 0);
    assert_eq!(report["env"]["threads"], 2);
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"pushout.round3.containment"));

    let points = dir.path().join("points.csv");
    fs::write(&points, "z1,z2\n0,0\n0.1,-0.2\n3,0\n").unwrap();
    let state = a.join("pushout_state.json");
    let out = run(&["classify", "--state", state.to_str().unwrap(), "--points", points.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let classes: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(classes, ["in_omega", "in_omega", "escaped"]);
}

#[test]
fn failing_checks_give_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    // a cap far too small for the second shell
    let cfg = dir.path().join("cap.json");
    fs::write(&cfg, r#"{"n": 1, "k_max": 2, "pushout": {"exponent_cap": 3, "escape_samples": 5, "omega_samples": 2}}"#).unwrap();
    let out = run(&["run", "--suite", "pushout", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    let build = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "pushout.build").unwrap();
    assert_eq!(build["passed"], false);
    assert!(build["detail"].as_str().unwrap().contains("error"));
}

#[test]
fn plan_path_prints_a_horizontal_plan() {
    let out = run(&["plan-path", "--from", "0,0,0", "--to", "1+2i,-0.5,3i"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["endpoint_error"].as_f64().unwrap() <= 1e-10);
    let segs = v["segments"].as_array().unwrap();
    assert!(!segs.is_empty());
    assert!(segs.iter().all(|s| s["exactly_horizontal"] == true));

    let out = run(&["plan-path", "--from", "0,0", "--to", "1,1,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = bin().env("HYPERCONTACT_THREADS", "many").args(["plan-path", "--from", "0,0,0", "--to", "1,0,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
