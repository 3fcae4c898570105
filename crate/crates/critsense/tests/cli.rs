use serde_json::Value;

use critsense::cli::run_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("critsense").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "stderr: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn classify_monkey_reports_index_minus_two() {
    let v = run_json(&["classify", "--gallery", "monkey", "--domain", "ball:0,0:1"]);
    let points = v["result"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 1);
    assert_eq!(points[0]["hom_index"]["index"], -2);
    assert_eq!(v["config"]["gallery"], "monkey");
    assert_eq!(v["config"]["grid"], 64);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn audit_monkey_passes_with_total_one() {
    let v = run_json(&["audit", "--gallery", "monkey", "--domain", "ball:0,0:1"]);
    assert_eq!(v["result"]["total"].as_f64(), Some(1.0));
    assert_eq!(v["result"]["interior"], -2);
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn sequence_merging_maxima_flags_multi_match() {
    let v = run_json(&["sequence", "--gallery", "merging_maxima", "--n", "4,16,64"]);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().any(|r| r["multi_match"] == true));
    let res: Vec<f64> = rows.iter().map(|r| r["resolution"].as_f64().unwrap()).collect();
    assert!(res.windows(2).all(|w| w[1] < w[0]));
    assert!(res[2] < 0.01);
}

#[test]
fn short_family_names_resolve() {
    let v = run_json(&["sequence", "--gallery", "fig10", "--n", "4,16,64"]);
    assert_eq!(v["config"]["gallery"], "merging_maxima");
    let rows = v["result"]["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["multi_match"] == true));
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let (_, out, _) = run(&["audit", "--gallery", "monkey"]);
    assert!(out.contains("\"total\": 1.0000000000000000e0"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["mountain", "--gallery", "two_gaussian", "--p1", "-0.4,0", "--p2", "0.4,0"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn montecarlo_ignores_thread_count() {
    let args = ["montecarlo", "--trials", "12", "--n", "10,100", "--grid", "128", "--records"];
    let (_, a, _) = run(&args);
    std::env::set_var("CRITSENSE_THREADS", "3");
    let (_, b, _) = run(&args);
    std::env::remove_var("CRITSENSE_THREADS");
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["classify", "--gallery", "monkey", "--domain", "disc:1"]).0, 2);
    assert_eq!(run(&["mountain", "--gallery", "two_gaussian"]).0, 2);
    assert_eq!(run(&["classify", "--gallery", "monkey", "--domain", "interval:-1,1"]).0, 2);
}

#[test]
fn numeric_failures_exit_with_one_and_structured_error() {
    let (code, _, err) = run(&["classify", "--gallery", "nope"]);
    assert_eq!(code, 1);
    let e: Value = serde_json::from_str(&err).unwrap();
    assert_eq!(e["error"], "unknown_gallery");
    let (code, _, err) = run(&["mountain", "--gallery", "paraboloid", "--p1", "0,0", "--p2", "0.5,0"]);
    assert_eq!(code, 1);
    let e: Value = serde_json::from_str(&err).unwrap();
    assert_eq!(e["error"], "mountain_pass");
}

#[test]
fn flow_trajectory_csv() {
    let (code, out, err) = run(&["flow", "--gallery", "cubic_1d", "--n", "20", "--trajectory", "0.05", "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next(), Some("t,x0"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1001);
    assert!(rows[1000].starts_with("1.0000000000000000e0,"));
}

#[test]
fn csv_without_table_is_a_usage_error() {
    assert_eq!(run(&["flow", "--gallery", "cubic_1d", "--n", "20", "--format", "csv"]).0, 2);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = std::env::temp_dir().join(format!("critsense-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, r#"{"gallery": "saddle", "domain": "box:-1,-1:1,1", "grid": 32}"#).unwrap();
    let v = run_json(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(v["config"]["grid"], 32);
    assert_eq!(v["config"]["domain"]["shape"], "box");
    let points = v["result"]["points"].as_array().unwrap();
    assert_eq!(points[0]["hom_index"]["index"], -1);
    let out = dir.join("out.json");
    let (code, stdout, _) = run(&["classify", "--config", cfg.to_str().unwrap(), "--grid", "40", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["config"]["grid"], 40);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn gallery_lists_every_family() {
    let v = run_json(&["gallery"]);
    let names: Vec<&str> = v["result"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(names, critsense_core::gallery::NAMES);
}
