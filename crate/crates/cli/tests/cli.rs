use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ma-eigen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const INTERVAL: &str = r#"{"domain":{"kind":"interval","a":0,"b":1},"h":0.0078125}"#;
const DISK: &str = r#"{"domain":{"kind":"disk","center":[0,0],"radius":1},"h":0.0625,"W":2}"#;

#[test]
fn oracle_1d_prints_pi_squared() {
    let out = run(&["oracle", "1d", "--length", "1"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let lambda = v["lambda"].as_f64().unwrap();
    assert!((lambda - std::f64::consts::PI.powi(2)).abs() < 1e-14);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with(r#"{"lambda":9.8696"#));
}

#[test]
fn oracle_radial_reports_dimension() {
    let out = run(&["oracle", "radial", "--n", "2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 2);
    assert!(v["lambda_unit_ball"].as_f64().unwrap() > 0.0);
    let one: Value = serde_json::from_slice(&run(&["oracle", "radial", "--n", "1"]).stdout).unwrap();
    let quarter_pi2 = std::f64::consts::PI.powi(2) / 4.0;
    assert!((one["lambda_unit_ball"].as_f64().unwrap() / quarter_pi2 - 1.0).abs() < 1e-8);
}

#[test]
fn eigen_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), INTERVAL);
    let out_dir = dir.path().join("out");
    let out = run(&["eigen", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let result: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["status"], "converged");
    assert_eq!(result["grid_h"].as_f64(), Some(0.0078125));
    assert_eq!(result["domain"]["kind"], "interval");
    let lambda = result["lambda"].as_f64().unwrap();
    assert!((lambda / std::f64::consts::PI.powi(2) - 1.0).abs() < 1e-3);

    let history = fs::read_to_string(out_dir.join("history.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(
        lines.next(),
        Some("k,rayleigh,sup_norm,lp_norm,monotone_quantity,delta,energy,sweeps")
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[5], "NaN");
    let rows = history.lines().count() - 1;
    assert_eq!(result["iterations"].as_u64(), Some(rows as u64 - 1));

    let field = fs::read_to_string(out_dir.join("eigenfunction.csv")).unwrap();
    assert!(field.starts_with("ix,x,class,value\n"));
    assert_eq!(field.lines().count(), 1 + 129);
}

#[test]
fn eigen_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DISK);
    let mut outputs = Vec::new();
    for (name, parallel) in [("a", "off"), ("b", "off"), ("c", "on")] {
        let out_dir = dir.path().join(name);
        let out = run(&["eigen", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--parallel", parallel]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(
            ["history.csv", "result.json", "eigenfunction.csv"].map(|f| fs::read(out_dir.join(f)).unwrap()),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let field = String::from_utf8(outputs[0][2].clone()).unwrap();
    assert!(field.starts_with("ix,iy,x,y,class,value\n0,0,"));
}

#[test]
fn bad_config_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"domain":{"kind":"interval","a":0,"b":1},"h":-1}"#,
        r#"{"domain":{"kind":"interval","a":0,"b":1},"h":0.01,"typo":1}"#,
        "not json",
    ] {
        let cfg = write_config(dir.path(), body);
        let out = run(&["eigen", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(3), "{body}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
    let out = run(&["eigen", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["eigen"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn max_iter_reached_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"domain":{"kind":"interval","a":0,"b":1},"h":0.0078125,"iteration":{"max_iter":1}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&["eigen", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let result: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["status"], "max_iter_reached");
    assert_eq!(fs::read_to_string(out_dir.join("history.csv")).unwrap().lines().count(), 3);
}

#[test]
fn ma_solve_constant_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DISK);
    let a = dir.path().join("a");
    let out = run(&["ma-solve", "--config", &cfg, "--rhs", "constant:1", "--out", a.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let solution = fs::read_to_string(a.join("solution.csv")).unwrap();
    // f = 1 reproduces the paraboloid (|x|² - 1)/2 at every node.
    for line in solution.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (x, y, value): (f64, f64, f64) = (cols[2].parse().unwrap(), cols[3].parse().unwrap(), cols[5].parse().unwrap());
        let expected = if cols[4] == "exterior" { 0.0 } else { 0.5 * (x * x + y * y - 1.0) };
        assert!((value - expected).abs() < 1e-6, "{line}");
    }

    // A field dump of constant 4 as the rhs doubles the solution.
    let rhs_path = dir.path().join("rhs.csv");
    let rhs: String = solution
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 0 {
                return format!("{line}\n");
            }
            let (head, _) = line.rsplit_once(',').unwrap();
            format!("{head},4\n")
        })
        .collect();
    fs::write(&rhs_path, rhs).unwrap();
    let b = dir.path().join("b");
    let spec = format!("file:{}", rhs_path.display());
    let out = run(&["ma-solve", "--config", &cfg, "--rhs", &spec, "--out", b.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doubled = fs::read_to_string(b.join("solution.csv")).unwrap();
    for (l1, l2) in solution.lines().zip(doubled.lines()).skip(1) {
        let v1: f64 = l1.rsplit(',').next().unwrap().parse().unwrap();
        let v2: f64 = l2.rsplit(',').next().unwrap().parse().unwrap();
        assert!((v2 - 2.0 * v1).abs() < 1e-6);
    }

    for bad in ["constant:-1", "constant:x", "poisson", "file:/nonexistent.csv"] {
        let out = run(&["ma-solve", "--config", &cfg, "--rhs", bad, "--out", b.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(3), "{bad}");
    }
}

#[test]
fn ma_solve_nonconvergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"domain":{"kind":"disk","center":[0,0],"radius":1},"h":0.0625,
            "solver":{"method":"gauss_seidel","max_sweeps":2}}"#,
    );
    let out = run(&["ma-solve", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes() {
    let out = run(&["check", "--seed", "7"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().count(), 7);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));
}
