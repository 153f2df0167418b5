use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fmtkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmtkit")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Value {
    let out = fmtkit(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn fails(args: &[&str], code: i32) -> String {
    let out = fmtkit(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
    String::from_utf8(out.stderr).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn student_coefficients() {
    let v = ok(&["targets-coeffs", "--name", "student", "--nu", "5"]);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["command"], "targets-coeffs");
    let r = &v["result"];
    assert_eq!(r["alpha"].as_f64(), Some(0.5));
    assert_eq!(r["beta"].as_f64(), Some(0.0));
    assert_eq!(r["gamma"].as_f64(), Some(2.5));
}

#[test]
fn classify_gamma_only() {
    let v = ok(&["classify", "--alpha", "0", "--beta", "2", "--gamma", "2"]);
    let c = &v["result"]["classifier"];
    let text = c.to_string();
    assert!(text.contains("GammaOnly") || text.contains("gamma_only"), "{text}");
    // β = 2/λ and γ = 2a/λ² give λ = 1, a = 1
    let verdict = &c["verdict"];
    let field = |k: &str| verdict.as_object().and_then(|o| o.values().find_map(|v| v.get(k))).or(verdict.get(k)).and_then(Value::as_f64);
    assert_eq!(field("lambda"), Some(1.0), "{verdict}");
    assert_eq!(field("a"), Some(1.0), "{verdict}");
}

#[test]
fn diagnose_clt_decreases_towards_three() {
    let v = ok(&["diagnose", "--family", "gaussian_clt", "--m", "1,2,4,8,16", "--target", "normal", "--gamma", "1", "--seed", "7", "--mc", "20000"]);
    let ef4: Vec<f64> = v["result"]["members"].as_array().unwrap().iter().map(|m| m["ef4"].as_f64().unwrap()).collect();
    for (m, e) in [1.0, 2.0, 4.0, 8.0, 16.0].iter().zip(&ef4) {
        assert!((e - (3.0 + 12.0 / m)).abs() < 1e-12, "{ef4:?}");
    }
    assert!(ef4.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn seeded_commands_are_reproducible() {
    let runs: [&[&str]; 3] = [
        &["simulate", "--name", "normal", "--seed", "3", "--burn-in", "1000", "--samples", "2000", "--thinning", "5"],
        &["diagnose", "--family", "gamma_fixed", "--k", "2", "--m", "1", "--name", "gamma", "--a", "1", "--lambda", "0.5", "--mc", "5000", "--seed", "11"],
        &["oracle-check", "--seed", "5", "--cases", "20", "--pairs", "3", "--points", "50"],
    ];
    for args in runs {
        let (a, b) = (fmtkit(args), fmtkit(args));
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = fmtkit(&["simulate", "--name", "normal", "--seed", "3", "--burn-in", "1000", "--samples", "2000"]);
    let b = fmtkit(&["simulate", "--name", "normal", "--seed", "4", "--burn-in", "1000", "--samples", "2000"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn simulate_dump_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("samples.txt");
    let v = ok(&[
        "simulate", "--name", "beta", "--a", "2", "--b", "3", "--seed", "1", "--burn-in", "5000", "--samples", "500",
        "--thinning", "1000",
        "--out", out.to_str().unwrap(),
    ]);
    let r = &v["result"];
    assert!(r["ks_distance"].as_f64().unwrap() < 0.2);
    assert!(!r["stein_dictionary"]["tests"].as_array().unwrap().is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let values = fmtkit::io::parse_sample_dump(&text).unwrap();
    assert_eq!(values.len(), 500);
    let s = fmtkit::stein::NamedTarget::Beta { a: 2.0, b: 3.0 }.support();
    assert!(values.iter().all(|&x| s.contains(x)));
}

#[test]
fn oracle_check_passes() {
    let v = ok(&["oracle-check", "--seed", "1", "--cases", "50", "--pairs", "5", "--points", "100"]);
    assert_eq!(v["result"]["passed"], true);
    assert_eq!(v["result"]["moment_failures"], 0);
    assert_eq!(v["result"]["product_failures"], 0);
}

#[test]
fn stein_check_reports() {
    let v = ok(&["stein-check", "--name", "gamma", "--a", "2", "--lambda", "1", "--mc", "5000", "--seed", "2"]);
    let r = &v["result"];
    for s in r["stein_solutions"].as_array().unwrap() {
        assert!(s["max_residual"].as_f64().unwrap() < 1e-6, "{s}");
    }
    let m = &r["moments"];
    for i in 0..3 {
        let (a, b) = (m["recursion"][i].as_f64().unwrap(), m["quadrature"][i].as_f64().unwrap());
        assert!((a - b).abs() < 1e-6 * a.abs().max(1.0));
    }
}

#[test]
fn validation_errors_exit_two_and_name_the_flag() {
    assert!(fails(&["targets-coeffs", "--name", "student"], 2).contains("nu"));
    assert!(fails(&["targets-coeffs", "--name", "student", "--nu", "1.5"], 2).contains("nu"));
    assert!(fails(&["targets-coeffs", "--name", "normal", "--nu", "5"], 2).contains("--nu"));
    assert!(fails(&["targets-coeffs", "--name", "cauchy"], 2).contains("name"));
    assert!(fails(&["simulate", "--name", "normal"], 2).contains("--seed"));
    assert!(fails(&["simulate", "--name", "normal", "--seed", "1", "--dt", "-1"], 2).contains("--dt"));
    assert!(fails(&["diagnose", "--family", "gaussian_clt", "--m", "1", "--name", "normal", "--mc", "10"], 2).contains("--seed"));
    assert!(fails(&["diagnose", "--family", "nope", "--m", "1", "--name", "normal"], 2).contains("--family"));
    assert!(fails(&["oracle-check"], 2).contains("--seed"));
    fails(&["no-such-command"], 2);
}

#[test]
fn numeric_failures_exit_one() {
    // explicit Euler with dt = 5 overshoots and blows up
    let err = fails(&["simulate", "--name", "normal", "--seed", "1", "--dt", "5", "--burn-in", "10000", "--samples", "10"], 1);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn heavy_tail_is_rejected_as_input() {
    // Student ν = 3 has no fourth moment
    let err = fails(&["diagnose", "--family", "gaussian_clt", "--m", "1", "--name", "student", "--nu", "3"], 2);
    assert!(err.contains("moment"), "{err}");
}

#[test]
fn kernel_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = "{\n  \"dim\": 2,\n  \"order\": 2,\n  \"entries\": [\n    {\"idx\": [0, 0], \"val\": 1.0000000000000000e0}\n  ]\n}\n";
    let path = write(dir.path(), "k.json", good);
    let k = fmtkit::io::load_kernel(&path).unwrap();
    assert_eq!(k.norm_sq(), 1.0);
    let copy = dir.path().join("copy.json");
    fmtkit::io::save_kernel(&copy, &k).unwrap();
    assert_eq!(std::fs::read_to_string(&copy).unwrap(), good);

    // explicit family: e₁⊗e₁ is centred χ²₁, a Gamma(½, ½) fixed point
    let v = ok(&["diagnose", "--family", "explicit", "--kernel", &path, "--name", "gamma", "--a", "0.5", "--lambda", "0.5"]);
    assert!(v["result"]["members"][0]["stein_residual_l2"].as_f64().unwrap().abs() < 1e-12);

    let bad = write(dir.path(), "bad.json", r#"{"dim": 3, "order": 2, "entries": [{"idx": [2, 1], "val": 1.0}]}"#);
    let err = fails(&["diagnose", "--family", "explicit", "--kernel", &bad, "--name", "normal"], 2);
    assert!(err.contains("idx") || err.contains("sorted"), "{err}");
    let junk = write(dir.path(), "junk.json", "{\"dim\": 2");
    fails(&["diagnose", "--family", "explicit", "--kernel", &junk, "--name", "normal"], 2);
}

#[test]
fn target_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "t.json", r#"{"name": "gamma", "params": {"a": 2, "lambda": 1}}"#);
    let v = ok(&["stein-check", "--target-file", &path]);
    let c = &v["result"]["coefficient"];
    assert_eq!((c["alpha"].as_f64(), c["beta"].as_f64(), c["gamma"].as_f64()), (Some(0.0), Some(2.0), Some(4.0)));
    let extra = write(dir.path(), "x.json", r#"{"name": "gamma", "params": {"a": 2, "lambda": 1, "nu": 3}}"#);
    assert!(fails(&["stein-check", "--target-file", &extra], 2).contains("nu"));
}

#[test]
fn targets_list_names_every_target() {
    let v = ok(&["targets-list"]);
    let names: Vec<&str> = v["result"]["targets"].as_array().unwrap().iter().map(|t| t["name"].as_str().unwrap()).collect();
    for n in ["normal", "student", "pareto", "gamma", "inverse_gamma", "f", "uniform", "beta"] {
        assert!(names.contains(&n), "{names:?}");
    }
}
