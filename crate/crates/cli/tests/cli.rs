use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn relu_peak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relu-peak")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = relu_peak(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> String {
    let path = p(dir, name);
    std::fs::write(&path, contents).unwrap();
    path
}

const RELU_X: &str = r#"{"widths":[1,1,1],"layers":[{"W":[[1.0]],"b":[0.0]}],"a":[1.0]}"#;
const STAIRCASE: &str = r#"{"widths":[1,2,1],"layers":[{"W":[[1.0],[1.0]],"b":[0.0,-0.5]}],"a":[1.0,1.0]}"#;

#[test]
fn gen_is_deterministic_and_loadable() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.json"), p(&dir, "b.json"));
    ok(&["gen", "--widths", "2,4,1", "--seed", "1", "--out", &a]);
    ok(&["gen", "--widths", "2,4,1", "--seed", "1", "--out", &b]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(json(Path::new(&a))["widths"], serde_json::json!([2, 4, 1]));
    let bounds = p(&dir, "bounds.json");
    ok(&["bounds", "--net", &a, "--out", &bounds]);
    assert_eq!(json(Path::new(&bounds))["lower"][0].as_array().unwrap().len(), 4);
}

#[test]
fn gen_rejects_bad_widths() {
    let dir = TempDir::new().unwrap();
    let out = relu_peak(&["gen", "--widths", "0", "--out", &p(&dir, "n.json")]);
    assert!(!out.status.success());
    assert!(!dir.path().join("n.json").exists());
}

#[test]
fn optimize_examples() {
    let dir = TempDir::new().unwrap();
    let relu = write(&dir, "relu.json", RELU_X);
    let out = p(&dir, "r.json");
    ok(&["optimize", "--net", &relu, "--alg", "sampling", "--samples", "1", "--out", &out]);
    assert_eq!(json(Path::new(&out))["objective"], 1.0);

    let stair = write(&dir, "stair.json", STAIRCASE);
    ok(&["optimize", "--net", &stair, "--alg", "enhanced", "--samples", "5", "--out", &out]);
    let r = json(Path::new(&out));
    assert!((r["objective"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert_eq!(r["status"], "completed");
}

#[test]
fn mip_warm_start_dominates() {
    let dir = TempDir::new().unwrap();
    let net = p(&dir, "net.json");
    ok(&["gen", "--widths", "3,6,6,1", "--seed", "4", "--out", &net]);
    let warm = p(&dir, "warm.json");
    ok(&["optimize", "--net", &net, "--alg", "sampling", "--samples", "100", "--seed", "2", "--out", &warm]);
    let mip = p(&dir, "mip.json");
    ok(&["optimize", "--net", &net, "--alg", "mip", "--warm-start", &warm, "--time-limit", "0.01", "--out", &mip]);
    let (w, m) = (json(Path::new(&warm)), json(Path::new(&mip)));
    assert!(m["objective"].as_f64().unwrap() >= w["objective"].as_f64().unwrap());
}

#[test]
fn gap_with_sampling_warns() {
    let dir = TempDir::new().unwrap();
    let relu = write(&dir, "relu.json", RELU_X);
    let out = relu_peak(&[
        "optimize", "--net", &relu, "--alg", "sampling", "--gap", "0.5", "--samples", "2", "--out", &p(&dir, "r.json"),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--gap"));
}

#[test]
fn unknown_alg_and_bad_files_fail() {
    let dir = TempDir::new().unwrap();
    let relu = write(&dir, "relu.json", RELU_X);
    let out = p(&dir, "r.json");
    assert!(!relu_peak(&["optimize", "--net", &relu, "--alg", "gradient", "--out", &out]).status.success());
    let broken = write(&dir, "broken.json", "{\"widths\": [1,");
    let res = relu_peak(&["optimize", "--net", &broken, "--out", &out]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("broken.json"));
    assert!(!Path::new(&out).exists());
    let poly = write(&dir, "poly.json", r#"{"lower":[0,0],"upper":[1,1]}"#);
    assert!(!relu_peak(&["optimize", "--net", &relu, "--polytope", &poly, "--out", &out]).status.success());
}

#[test]
fn custom_polytope_is_used() {
    let dir = TempDir::new().unwrap();
    let relu = write(&dir, "relu.json", RELU_X);
    let poly = write(&dir, "poly.json", r#"{"lower":[-1],"upper":[2],"general":[{"row":[1.0],"rhs":0.75}]}"#);
    let out = p(&dir, "r.json");
    ok(&["optimize", "--net", &relu, "--polytope", &poly, "--alg", "mip", "--out", &out]);
    assert!((json(Path::new(&out))["objective"].as_f64().unwrap() - 0.75).abs() < 1e-9);
}

#[test]
fn evt_reports() {
    let dir = TempDir::new().unwrap();
    let relu = write(&dir, "relu.json", RELU_X);
    let out = p(&dir, "evt.json");
    let res = relu_peak(&["evt", "--net", &relu, "--n", "200", "--out", &out]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("estimation error"));

    let net = p(&dir, "net.json");
    ok(&["gen", "--widths", "3,10,10,1", "--seed", "5", "--out", &net]);
    ok(&["evt", "--net", &net, "--n", "2000", "--seed", "1", "--out", &out]);
    let r = json(Path::new(&out));
    for key in ["moment", "beta_mom", "notes", "distinct_values"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert!(r["moment"]["estimate"]["gamma"].as_f64().unwrap() < 0.0);
    assert!(r["beta_mom"]["required_samples"].as_u64().unwrap() > 0);
}

#[test]
fn bench_is_reproducible_and_dominated() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "spec.json",
        r#"{"dims":[2],"widths":[6],"seeds":[1,2,3],"methods":["sampling","enhanced","mip","mip_warm","oracle"],
            "per_method_budget":30,"n_samples":200,"warm_iters":100,"timing":false}"#,
    );
    let (a, b) = (p(&dir, "a.csv"), p(&dir, "b.csv"));
    ok(&["bench", "--spec", &spec, "--out", &a]);
    ok(&["bench", "--spec", &spec, "--out", &b]);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "d,seed,sampling,enhanced,mip,mip_warm,oracle");
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let oracle = v[6];
        // Six significant digits in the table, so compare at that precision.
        let tol = 1e-5 * oracle.abs().max(1.0);
        assert!(v[2..6].iter().all(|&m| m <= oracle + tol), "{line}");
        assert!(v[3] >= v[2], "{line}");
    }

    let empty = write(&dir, "empty.json", r#"{"dims":[2],"widths":[6],"seeds":[1],"methods":[]}"#);
    assert!(!relu_peak(&["bench", "--spec", &empty, "--out", &p(&dir, "c.csv")]).status.success());
    let zero = write(&dir, "zero.json", r#"{"dims":[2],"widths":[6],"seeds":[1],"methods":["mip"],"per_method_budget":0}"#);
    assert!(!relu_peak(&["bench", "--spec", &zero, "--out", &p(&dir, "c.csv")]).status.success());
}

#[test]
fn thread_count_env_is_honoured() {
    let dir = TempDir::new().unwrap();
    let relu = write(&dir, "relu.json", RELU_X);
    let out = p(&dir, "r.json");
    let res = Command::new(env!("CARGO_BIN_EXE_relu-peak"))
        .env("RELU_PEAK_THREADS", "2")
        .args(["optimize", "--net", &relu, "--alg", "sampling", "--samples", "3", "--out", &out])
        .output()
        .unwrap();
    assert!(res.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_relu-peak"))
        .env("RELU_PEAK_THREADS", "many")
        .args(["optimize", "--net", &relu, "--out", &out])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
