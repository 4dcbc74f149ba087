use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BENCHMARK: &str = r#"
[model]
a = 0.5
b = 0.5
c = 1.0
d = 1.0

[expansion]
variant = "DFB"
mu = 4.0
rho = 1.0
h0 = 1.0

[numerics]
n_cells = 64
t_max = 5.0
snapshot_every = 1.0
"#;

fn stefanpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stefanpp"))
        .args(args)
        .env("STEFANPP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_artifacts_and_echo_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", BENCHMARK);
    let out1 = dir.path().join("first");
    let o = stefanpp(&["simulate", s(&cfg), "--out", s(&out1)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let outcome = json(&out1.join("outcome.json"));
    assert!(outcome["verdict"].is_string());
    let header = fs::read_to_string(out1.join("trajectory.csv")).unwrap();
    assert!(header.starts_with("t,g,h,sup_u,sup_v,ux_h,vx_h,hprime"));
    let snaps = fs::read_to_string(out1.join("snapshots.csv")).unwrap();
    assert!(snaps.starts_with("t,y,x,u,v"));

    // The echoed spec is itself a valid config that reproduces the run.
    let echo = toml::to_string(&outcome["spec"]).unwrap();
    let cfg2 = write_config(dir.path(), "echo.toml", &echo);
    let out2 = dir.path().join("second");
    let o = stefanpp(&["simulate", s(&cfg2), "--out", s(&out2)]);
    assert!(o.status.success());
    assert_eq!(json(&out2.join("outcome.json"))["spec"], outcome["spec"]);
    for file in ["trajectory.csv", "snapshots.csv"] {
        assert_eq!(fs::read(out1.join(file)).unwrap(), fs::read(out2.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn missing_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &BENCHMARK.replace("d = 1.0\n", ""));
    let o = stefanpp(&["simulate", s(&cfg), "--out", s(dir.path())]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`d`"), "{err}");
}

#[test]
fn unknown_key_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &BENCHMARK.replace("n_cells = 64", "n_cels = 64"));
    let o = stefanpp(&["simulate", s(&cfg), "--out", s(dir.path())]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("n_cels") && err.contains("line 15"), "{err}");
}

#[test]
fn zero_horizon_is_undetermined() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.toml", &BENCHMARK.replace("t_max = 5.0", "t_max = 0.0"));
    let o = stefanpp(&["simulate", s(&cfg), "--out", s(dir.path())]);
    assert!(o.status.success());
    assert_eq!(json(&dir.path().join("outcome.json"))["verdict"], "Undetermined");
    let rows = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap().lines().count();
    assert_eq!(rows, 2);
}

#[test]
fn step_failure_exits_nonzero_after_writing() {
    let dir = tempfile::tempdir().unwrap();
    let text = BENCHMARK.replace("t_max = 5.0", "t_max = 5.0\ndt = 10.0");
    let cfg = write_config(dir.path(), "unstable.toml", &text);
    let o = stefanpp(&["simulate", s(&cfg), "--out", s(dir.path())]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("step failure"));
    assert_eq!(json(&dir.path().join("outcome.json"))["termination"]["kind"], "StepFailure");
}

#[test]
fn speed_on_vanishing_run_fails() {
    let dir = tempfile::tempdir().unwrap();
    let text = BENCHMARK.replace("mu = 4.0", "mu = 0.001").replace("t_max = 5.0", "t_max = 20.0");
    let cfg = write_config(dir.path(), "vanish.toml", &text);
    let o = stefanpp(&["speed", s(&cfg), "--out", s(dir.path())]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("not spreading"));
}

#[test]
fn speed_writes_fit() {
    let dir = tempfile::tempdir().unwrap();
    let text = BENCHMARK.replace("\"DFB\"", "\"NFB\"").replace("h0 = 1.0", "h0 = 4.0").replace("t_max = 5.0", "t_max = 20.0");
    let cfg = write_config(dir.path(), "speed.toml", &text);
    let o = stefanpp(&["speed", s(&cfg), "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("speed.json"));
    assert_eq!(v["bound"], 2.0);
    assert_eq!(v["satisfied"], true);
    assert_eq!(v["tail_condition"], "a");
}

#[test]
fn threshold_brackets_below_explicit_bound() {
    let dir = tempfile::tempdir().unwrap();
    let text = BENCHMARK.replace("t_max = 5.0", "t_max = 60.0");
    let cfg = write_config(dir.path(), "th.toml", &text);
    let o = stefanpp(&["threshold", s(&cfg), "--out", s(dir.path()), "--mu-lo", "0.1", "--iters", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("mustar.json"));
    let (lo, hi, bound) = (v["mu_lo"].as_f64().unwrap(), v["mu_hi"].as_f64().unwrap(), v["explicit_bound"].as_f64().unwrap());
    assert!(0.1 <= lo && lo < hi && hi < bound);
    assert!(hi - lo <= (bound - 0.1) / 64.0 + 1e-9);
    assert!(v["probes"].as_array().unwrap().len() >= 8);
}

#[test]
fn stationary_emits_bounds_and_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "st.toml", "[model]\na = 0.25\nb = 0.25\nc = 0.25\nd = 1.0\n");
    let o = stefanpp(&["stationary", s(&cfg), "--out", s(dir.path()), "--length", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bounds = fs::read_to_string(dir.path().join("stationary_bounds.csv")).unwrap();
    assert!(bounds.starts_with("x,ubar,vbar,ulow,vlow\n"));
    assert_eq!(bounds.lines().count(), 20 * 16 + 2);
    let sol = fs::read_to_string(dir.path().join("stationary_solution.csv")).unwrap();
    assert!(sol.starts_with("x,u,v\n"));
    assert!(json(&dir.path().join("stationary.json"))["residual_sup"].as_f64().unwrap() < 1e-8);
}

#[test]
fn stationary_rejects_strong_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "st.toml", "[model]\na = 1\nb = 1\nc = 1\nd = 1\n");
    let o = stefanpp(&["stationary", s(&cfg), "--out", s(dir.path())]);
    assert!(!o.status.success());
}

#[test]
fn quick_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = stefanpp(&["verify", "--suite", "quick", "--seed", "3", "--out", s(dir.path())]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.contains("9/9 checks passed"), "{stdout}");
    let v = json(&dir.path().join("verify.json"));
    assert_eq!(v["seed"], 3);
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_single_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = BENCHMARK.replace("\"DFB\"", "\"NFB\"").replace("h0 = 1.0", "h0 = 4.0");
    let cfg = write_config(dir.path(), "one.toml", &text);
    let o = stefanpp(&["verify", s(&cfg), "--sequential"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.contains("front ordering"));
}
