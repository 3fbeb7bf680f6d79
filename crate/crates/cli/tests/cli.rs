use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn p3tau(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_p3tau"))
        .args(args)
        .env_remove("P3TAU_TOL")
        .output()
        .expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn cnorm(v: &Value) -> f64 {
    v["re"].as_f64().unwrap().hypot(v["im"].as_f64().unwrap())
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("p3tau-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn ratio_vanishes_at_normalization_point() {
    let o = p3tau(&["ratio", "--sigma", "0.25,0", "--eta", "0.25,0"]);
    assert!(o.status.success());
    let v = json(&o);
    for m in ["closed_form", "quadrature", "action"] {
        assert!(cnorm(&v["result"][m]["log_ratio"]) < 1e-8, "{m}");
    }
}

#[test]
fn connect_at_normalization_point() {
    let o = p3tau(&["connect", "--sigma", "0.25,0", "--eta", "0.25,0"]);
    assert!(o.status.success());
    let r = &json(&o)["result"];
    for k in ["alpha", "beta", "p", "q", "nu", "b_plus", "b_minus"] {
        assert!(cnorm(&r[k]) < 1e-15, "{k}");
    }
    assert_eq!(r["rho"]["error"]["kind"], "log_singularity");
}

#[test]
fn methods_agree_within_estimate() {
    let o = p3tau(&["ratio", "--sigma", "0.3,0", "--eta", "0.15,0"]);
    assert!(o.status.success());
    let r = &json(&o)["result"];
    let gap = r["quadrature_minus_closed_form"].as_f64().unwrap();
    assert!(gap <= r["quadrature"]["error_estimate"].as_f64().unwrap(), "gap {gap}");
    assert_eq!(r["quadrature"]["method"], "quadrature");
}

#[test]
fn identical_runs_are_bit_identical() {
    let args = ["chi", "--sigma", "0.3,0.01", "--eta", "0.2,-0.01"];
    let (a, b) = (p3tau(&args), p3tau(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v.get("runtime_s").is_none());
    let t = json(&p3tau(&["chi", "--sigma", "0.3", "--eta", "0.2", "--timing"]));
    assert!(t["runtime_s"].as_f64().is_some());
}

#[test]
fn cauchy_parameterization_matches() {
    let c = json(&p3tau(&["connect", "--sigma", "0.3", "--eta", "0.15"]));
    let (a, b) = (&c["result"]["alpha"], &c["result"]["beta"]);
    let fmt = |v: &Value| format!("{},{}", v["re"], v["im"]);
    let o = p3tau(&["connect", "--alpha", &fmt(a), "--beta", &fmt(b)]);
    assert!(o.status.success());
    let r = &json(&o)["result"];
    assert!((r["sigma"]["re"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert!((r["eta"]["re"].as_f64().unwrap() - 0.15).abs() < 1e-12);
}

#[test]
fn validation_failures_exit_one_with_diagnostic() {
    let o = p3tau(&["ratio", "--sigma", "0.6", "--eta", "0.15"]);
    assert_eq!(o.status.code(), Some(1));
    let e = &json(&o)["error"];
    assert_eq!(e["kind"], "domain");
    assert!(e["message"].as_str().unwrap().contains("Re sigma"));
    for args in [
        &["ratio", "--sigma", "0.3"][..],
        &["ratio", "--sigma", "0.3", "--eta", "0.1", "--alpha", "0", "--beta", "0"],
        &["chi"],
        &["ratio", "--sigma", "0.3", "--eta", "0.15", "--t1", "50"],
        &["ratio", "--sigma", "a,b", "--eta", "0.15"],
        &["nope"],
    ] {
        assert_eq!(p3tau(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_two() {
    // starting near the unstable equilibrium u = π the solution hits a pole
    let o = p3tau(&["solve", "--alpha", "0", "--beta", "3.14159,3", "--x1", "20", "--at", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let e = &json(&o)["error"];
    assert_eq!(e["exit_code"], 2);
    assert_eq!(e["kind"], "step_underflow");
    assert_eq!(e["context"]["tol"], 1e-12);
}

#[test]
fn tolerance_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_p3tau"))
        .args(["ratio", "--sigma", "0.3", "--eta", "0.15"])
        .env("P3TAU_TOL", "1e-10")
        .output()
        .unwrap();
    assert_eq!(json(&o)["input"]["tol"], 1e-10);
    let o = Command::new(env!("CARGO_BIN_EXE_p3tau"))
        .args(["ratio", "--sigma", "0.3", "--eta", "0.15", "--tol", "1e-11"])
        .env("P3TAU_TOL", "1e-10")
        .output()
        .unwrap();
    assert_eq!(json(&o)["input"]["tol"], 1e-11);
}

#[test]
fn solve_writes_trajectory_csv() {
    let path = scratch("traj.csv");
    let o = p3tau(&["solve", "--sigma", "0.3", "--eta", "0.15", "--at", "1,2", "--x1", "5", "--format", "csv", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,re_u,im_u,re_ux,im_ux");
    assert_eq!(lines.len(), 5);
}

#[test]
fn mb_check_reports_small_defects() {
    let o = p3tau(&["mb-check", "--sigma", "0.3", "--eta", "0.15", "--x", "1,5"]);
    assert!(o.status.success());
    let r = &json(&o)["result"];
    assert!(r["max_defect"].as_f64().unwrap() < 1e-5);
    assert_eq!(r["at_h"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_preserves_grid_order() {
    let cfg = scratch("grid.conf");
    std::fs::write(&cfg, "command = chi\nsigma = 0.2:0.35:4\neta = 0.1 0.15 0.8\n").unwrap();
    let o = p3tau(&["sweep", cfg.to_str().unwrap()]);
    let v = json(&o);
    let pts = v["result"]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 12);
    for (i, p) in pts.iter().enumerate() {
        assert_eq!(p["index"], i);
        let want = [0.1, 0.15, 0.8][i % 3];
        assert!((p["eta"]["re"].as_f64().unwrap() - want).abs() < 1e-15);
    }
    // η = 0.8 fails the branch condition at every σ
    assert_eq!(v["result"]["failures"], 4);
    assert_eq!(o.status.code(), Some(1));
    let csv = p3tau(&["sweep", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().lines().count(), 13);
}

#[test]
fn verify_passes() {
    let o = p3tau(&["verify"]);
    let v = json(&o);
    assert_eq!(v["result"]["criteria"].as_array().unwrap().len(), 9);
    assert_eq!(o.status.success(), v["result"]["all_passed"] == true);
    assert!(o.status.success());
}
