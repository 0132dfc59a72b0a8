//! End-to-end runs of the binary against the shipped configs, including the
//! deterministic-reproducibility acceptance criterion.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_icgm")
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(repo_root())
        .output()
        .expect("binary runs")
}

#[test]
fn shape_on_fig2_reports_critical_directions() {
    let out = run(&["shape", "--config", "configs/fig2.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let c1 = v["c1"].as_f64().unwrap();
    let c2 = v["c2"].as_f64().unwrap();
    assert!((c1 - 0.1).abs() < 1e-9, "c1 = {c1}");
    assert!((c2 - 0.9).abs() < 1e-9, "c2 = {c2}");
}

#[test]
fn shape_csv_has_header_and_rows() {
    let out = run(&[
        "shape",
        "--config",
        "configs/ex33_5.json",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi1,gamma,chi"));
    assert!(lines.count() >= 100);
}

#[test]
fn linear_interval_in_shape_output() {
    let out = run(&["shape", "--config", "configs/ex33_3.json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let lo = v["linear_interval_c1"][0].as_f64().unwrap();
    let hi = v["linear_interval_c1"][1].as_f64().unwrap();
    assert!((lo - 0.2).abs() < 1e-6 && (hi - 0.4).abs() < 1e-6, "[{lo}, {hi}]");
}

#[test]
fn couple_check_exits_zero() {
    let out = run(&["couple-check", "--config", "configs/homog.json", "--size", "20"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["max_abs_deviation"].as_f64().unwrap() < 1e-9);
}

#[test]
fn unknown_config_key_exits_two_with_diagnostic() {
    let dir = std::env::temp_dir().join("icgm_cli_badcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{
  "environment": {
    "a": { "type": "constant", "value": 0.5 },
    "b": { "type": "constant", "value": 0.5 },
    "alpha": { "type": "atomic", "atoms": [[0.5, 1.0]] },
    "beta": { "type": "atomic", "atoms": [[0.5, 1.0]] },
    "seed": 1,
    "window": [[-5, -5], [1000, 1000]]
  },
  "shappe": { "directions": 3 }
}"#,
    )
    .unwrap();
    let out = run(&["shape", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("shappe"), "diagnostic should name the key: {err}");
}

#[test]
fn missing_config_exits_two() {
    let out = run(&["shape", "--config", "/nonexistent/nope.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lpp_csv_field_dump() {
    let out = run(&[
        "lpp",
        "--config",
        "configs/homog.json",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("i,j,w,G\n"));
    assert_eq!(text.lines().count(), 1 + 12 * 12);
}

#[test]
fn geodesic_csv_path_dump() {
    let out = run(&[
        "geodesic",
        "--config",
        "configs/thin_trap.json",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,i,j\n"));
    assert_eq!(text.lines().count(), 1 + 501);
}

#[test]
fn seed_flag_overrides_config() {
    let a = run(&["lpp", "--config", "configs/homog.json", "--seed", "1"]);
    let b = run(&["lpp", "--config", "configs/homog.json", "--seed", "2"]);
    let c = run(&["lpp", "--config", "configs/homog.json", "--seed", "1"]);
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(a.stdout, c.stdout);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn env_var_seed_is_lowest_precedence() {
    let dir = std::env::temp_dir().join("icgm_cli_noseed");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("noseed.json");
    std::fs::write(
        &path,
        r#"{
  "environment": {
    "a": { "type": "constant", "value": 0.5 },
    "b": { "type": "constant", "value": 0.5 },
    "alpha": { "type": "atomic", "atoms": [[0.5, 1.0]] },
    "beta": { "type": "atomic", "atoms": [[0.5, 1.0]] },
    "seed": 0,
    "window": [[-5, -5], [1000, 1000]]
  }
}"#,
    )
    .unwrap();
    // With an explicit config seed, the environment variable must not win.
    let with_env = Command::new(bin())
        .args(["lpp", "--config", path.to_str().unwrap()])
        .env("ICGM_SEED", "42")
        .current_dir(repo_root())
        .output()
        .unwrap();
    let without_env = run(&["lpp", "--config", path.to_str().unwrap()]);
    assert_eq!(with_env.stdout, without_env.stdout);
}

#[test]
fn acceptance_12_verify_all_byte_identical() {
    // Reduced replica count keeps the battery quick; the reports and exit
    // status must be byte-identical across repeated runs.
    let args = [
        "verify-all",
        "--config",
        "configs/homog.json",
        "--replicas",
        "400",
    ];
    let first = run(&args);
    let second = run(&args);
    let pass = first.status.success()
        && second.status.success()
        && first.stdout == second.stdout
        && !first.stdout.is_empty();
    println!(
        "ACCEPTANCE 12 {}: deterministic verify-all — {} bytes, exit {:?}",
        if pass { "PASS" } else { "FAIL" },
        first.stdout.len(),
        first.status.code()
    );
    assert!(
        pass,
        "stderr: {}\nstdout: {}",
        String::from_utf8_lossy(&first.stderr),
        String::from_utf8_lossy(&first.stdout)
    );
}

#[test]
fn worker_count_does_not_change_results() {
    let one = run(&[
        "verify-all",
        "--config",
        "configs/homog.json",
        "--replicas",
        "200",
        "--workers",
        "1",
    ]);
    let two = run(&[
        "verify-all",
        "--config",
        "configs/homog.json",
        "--replicas",
        "200",
        "--workers",
        "2",
    ]);
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn zrp_trap_law_output() {
    let out = run(&[
        "particles",
        "--config",
        "configs/zrp_trap.json",
        "--replicas",
        "500",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["law_theoretical"]["2"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let stuck2 = v["stuck_at_empirical"]["2"].as_f64().unwrap();
    assert!((stuck2 - 0.5).abs() < 0.1, "stuck {stuck2}");
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("icgm_cli_out");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("shape.json");
    let out = run(&[
        "shape",
        "--config",
        "configs/fig2.json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v["c1"].as_f64().unwrap() - 0.1).abs() < 1e-9);
}
