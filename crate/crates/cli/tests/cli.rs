use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn decorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decorr")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_line(out: &Output) -> String {
    let s = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(s.lines().count(), 1, "diagnostic is not one line: {s:?}");
    s.trim_end().to_string()
}

#[test]
fn analyze_squared_distance() {
    let k = data("sq_dist.csv");
    let out = decorr(&["analyze", "--kernel", path(&k), "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let res = &r["result"];
    assert_eq!(res["full"]["verdict"], "not_positive");
    assert_eq!(res["balanced"]["verdict"], "not_positive");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for mode in ["full", "balanced"] {
        let w: Vec<f64> = serde_json::from_value(res[mode]["witness"].clone()).unwrap();
        assert!((w[0] - h).abs() < 1e-12 && (w[1] + h).abs() < 1e-12, "{mode}: {w:?}");
    }
}

#[test]
fn report_envelope() {
    let k = data("gauss.csv");
    let out = decorr(&["analyze", "--kernel", path(&k)]);
    let r = report(&out);
    assert_eq!(r["tool"], "decorr");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    let cfg = &r["config"];
    assert_eq!(cfg["tol"], 1e-9);
    assert_eq!(cfg["resolution"], 8);
    assert_eq!(cfg["N"], serde_json::json!([4, 4]));
    assert_eq!(cfg["n_max"], 16);
    assert_eq!(cfg["seed"], 0);
    let digest = hex::encode(Sha256::digest(fs::read(&k).unwrap()));
    assert_eq!(r["inputs"][0]["sha256"], digest);
    assert_eq!(r["inputs"][0]["role"], "kernel");
}

#[test]
fn reports_are_byte_identical() {
    let (k, m) = (data("shifted.csv"), data("mu3.json"));
    let args = ["verdict", "--kernel", path(&k), "--marginal", path(&m)];
    let a = decorr(&args);
    let b = decorr(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verdict_exit_codes() {
    let mu = data("mu2.json");
    let out = decorr(&["verdict", "--kernel", path(&data("gauss.csv")), "--marginal", path(&mu), "--grid", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["decorrelated"], true);
    assert_eq!(r["result"]["unique_flag"], "unique");
    assert!(r["result"]["witness"].is_null());

    let out = decorr(&["verdict", "--kernel", path(&data("sq_dist.csv")), "--marginal", path(&mu)]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["result"]["decorrelated"], false);
    assert_eq!(r["result"]["gap"], -0.5);
    assert_eq!(r["result"]["witness"]["atoms"].as_array().unwrap().len(), 2);
}

#[test]
fn nbody_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("hierarchy.csv");
    let out = decorr(&[
        "nbody",
        "--kernel",
        path(&data("id2.csv")),
        "--marginal",
        path(&data("mu2.json")),
        "-N",
        "2..6",
        "--out",
        path(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.split("\r\n").filter(|l| !l.is_empty()).collect();
    assert_eq!(lines[0], "N,value,gap");
    // odd N = 2j + 1 splits as j + 1 and j bodies: j/(2j + 1)
    let want = [0.0, 1.0 / 3.0, 1.0 / 3.0, 0.4, 0.4];
    for (line, (n, w)) in lines[1..].iter().zip((2..).zip(want)) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], n.to_string());
        let v: f64 = f[1].parse().unwrap();
        let g: f64 = f[2].parse().unwrap();
        assert!((v - w).abs() < 1e-9, "N={n}: {v}");
        assert!((g - (w - 0.5)).abs() < 1e-9);
    }
    let r = report(&out);
    assert_eq!(r["config"]["N"], serde_json::json!([2, 6]));
    assert_eq!(r["result"]["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn expand_t_squared() {
    let out = decorr(&["expand", "--profile", path(&data("t_squared.csv")), "--dim", "2", "--samples", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let a: Vec<f64> = serde_json::from_value(r["result"]["coefficients"].clone()).unwrap();
    assert_eq!(a.len(), 17);
    assert!((a[0] - 1.0 / 3.0).abs() < 1e-10);
    assert!((a[2] - 2.0 / 3.0).abs() < 1e-10);
    assert_eq!(r["result"]["classification"], "PD_up_to_truncation");
    assert_eq!(r["result"]["sphere_check"]["failures"], 0);
    assert_eq!(r["config"]["lambda"], 0.5);
}

#[test]
fn expand_with_lambda_only() {
    let out = decorr(&["expand", "--profile", path(&data("t_squared.csv")), "--lambda", "0.7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["result"]["sphere_check"].is_null());
}

#[test]
fn circulant_spectrum() {
    let out = decorr(&["spectrum", "--circulant", path(&data("circ4.csv"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let s: Vec<f64> = serde_json::from_value(r["result"]["eigenvalues"].clone()).unwrap();
    for (x, y) in s.iter().zip([4.0, 2.0, 0.0, 2.0]) {
        assert!((x - y).abs() < 1e-12);
    }
    assert_eq!(r["result"]["full"]["verdict"], "positive_semidefinite");
}

#[test]
fn kernel_spectrum() {
    let out = decorr(&["spectrum", "--kernel", path(&data("shifted.csv"))]);
    let r = report(&out);
    assert_eq!(r["result"]["full"]["verdict"], "not_positive");
    assert_eq!(r["result"]["balanced"]["verdict"], "positive_semidefinite");
}

#[test]
fn witness_gap() {
    let dir = tempfile::tempdir().unwrap();
    let mu = dir.path().join("mu.json");
    fs::write(&mu, r#"{"weights":[0.3,0.7]}"#).unwrap();
    let out = decorr(&["witness", "--kernel", path(&data("sq_dist.csv")), "--marginal", path(&mu)]);
    assert_eq!(out.status.code(), Some(0));
    let res = &report(&out)["result"];
    let gap = res["gap"].as_f64().unwrap();
    assert!((gap - res["predicted_gap"].as_f64().unwrap()).abs() < 1e-12);
    assert!((gap + 0.18).abs() < 1e-12);

    let out = decorr(&["witness", "--kernel", path(&data("gauss.csv")), "--marginal", path(&data("mu2.json"))]);
    assert!(report(&out)["result"]["direction"].is_null());

    let out = decorr(&["witness", "--kernel", path(&data("sq_dist.csv")), "--marginal", path(&mu), "--eps", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("--eps"));
}

#[test]
fn input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "2\n0,1\n2,0\n").unwrap();
    let out = decorr(&["analyze", "--kernel", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("bad.csv"));

    let out = decorr(&["analyze", "--kernel", path(&data("gauss.csv")), "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("--frobnicate"));

    let off = dir.path().join("off.json");
    fs::write(&off, r#"{"weights":[0.3,0.7]}"#).unwrap();
    let out = decorr(&["verdict", "--kernel", path(&data("gauss.csv")), "--marginal", path(&off)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("off.json"));

    let out = decorr(&[
        "verdict",
        "--kernel",
        path(&data("gauss.csv")),
        "--marginal",
        path(&data("mu2.json")),
        "--grid",
        "4000000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("--grid"));

    let out = decorr(&["analyze", "--kernel", path(&dir.path().join("missing.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("missing.csv"));

    let out = decorr(&["analyze", "--kernel", path(&data("gauss.csv")), "--tol", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    stderr_line(&out);
}
