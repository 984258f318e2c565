use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entropy-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn fixture(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name);
    let mut args = vec!["fixture"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn entropy_of_sphere_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = fixture(dir.path(), "sphere2.obj", &["sphere", "--subdivisions", "3"]);
    let out = run(&["entropy", &sphere]);
    assert!(out.status.success());
    let w = json(&out);
    let e4 = 4.0 / std::f64::consts::E;
    assert!((w["value"].as_f64().unwrap() - e4).abs() < 0.01 * e4);
    assert!((w["t0"].as_f64().unwrap() - 1.0).abs() < 0.05);

    let manifest = fixture(dir.path(), "manifest_m2.json", &["sphere", "--subdivisions", "3", "--multiplicity", "2"]);
    let v = json(&run(&["entropy", &manifest]))["value"].as_f64().unwrap();
    assert_eq!(v, 2.0 * w["value"].as_f64().unwrap());

    let out = run(&["entropy", &sphere, "--window", "4", "inf"]);
    let v = json(&out)["value"].as_f64().unwrap();
    // F at t0 = 4: (4/4)e^{-1/4}
    assert!((v - (-0.25f64).exp()).abs() < 0.01 * 0.7788, "{v}");
}

#[test]
fn parse_and_invariant_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.obj");
    std::fs::write(&bad, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n").unwrap();
    let out = run(&["entropy", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let sphere = fixture(dir.path(), "s.obj", &["sphere", "--subdivisions", "1"]);
    let out = run(&["entropy", &sphere, "--window", "2", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["entropy", &sphere, "--window", "x", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flow_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = fixture(dir.path(), "sphere2.obj", &["sphere", "--subdivisions", "3"]);
    let traj = dir.path().join("traj");
    let out = run(&["flow", &sphere, "--dt", "1e-3", "--steps", "500", "--out", traj.to_str().unwrap(), "--record-every", "100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let index: Value = serde_json::from_str(&std::fs::read_to_string(traj.join("index.json")).unwrap()).unwrap();
    let files = index["files"].as_array().unwrap();
    let last = traj.join(files.last().unwrap().as_str().unwrap());
    let text = std::fs::read_to_string(last).unwrap();
    let r: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("v "))
        .map(|l| l[2..].split_whitespace().map(|x| x.parse::<f64>().unwrap().powi(2)).sum::<f64>().sqrt())
        .collect();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    assert!((mean - 2f64.sqrt()).abs() < 0.01 * 2f64.sqrt(), "{mean}");

    let single = dir.path().join("single");
    let out = run(&["flow", &sphere, "--dt", "1e-3", "--steps", "0", "--out", single.to_str().unwrap()]);
    assert!(out.status.success());
    let index: Value = serde_json::from_str(&std::fs::read_to_string(single.join("index.json")).unwrap()).unwrap();
    assert_eq!(index["times"].as_array().unwrap().len(), 1);

    let out = run(&["flow", &sphere, "--dt", "1", "--steps", "3", "--out", single.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("suggested"));
}

#[test]
fn pipeline_report_and_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = fixture(dir.path(), "sphere2.obj", &["sphere", "--subdivisions", "3"]);
    let report = dir.path().join("report.json");
    let out = run(&["pipeline", &sphere, "--m", "2", "--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["margin_positive"], true);
    assert_eq!(v["certificate"]["verdict"], "excluded");
    assert_eq!(v["certificate"]["excluded"][1], "inf");
    assert!((v["extinction"]["delta"].as_f64().unwrap() - 1.0).abs() < 0.1);
    // byte-identical reruns
    let again = run(&["pipeline", &sphere, "--m", "2"]);
    assert_eq!(out.stdout, again.stdout);
    assert_eq!(std::fs::read(&report).unwrap(), {
        let mut s = out.stdout.clone();
        s.pop();
        s
    });

    assert_eq!(run(&["pipeline", &sphere, "--m", "1"]).status.code(), Some(3));
    let cfg = dir.path().join("a.cfg");
    std::fs::write(&cfg, "window = 1.5, inf\n").unwrap();
    assert_eq!(run(&["pipeline", &sphere, "--m", "2", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
    std::fs::write(&cfg, "windows = 0.5, inf\n").unwrap();
    assert_eq!(run(&["pipeline", &sphere, "--m", "2", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));

    // a non-shrinker reference fails inside a stage
    let small = fixture(dir.path(), "sphere1.obj", &["sphere", "--subdivisions", "2", "--radius", "1"]);
    let out = run(&["pipeline", &small, "--m", "2"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(json(&out)["reference"].is_object());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unstable_direction"));
}

#[test]
fn fixtures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["ellipsoid", "concentric", "neck", "angenent"] {
        let p = fixture(dir.path(), &format!("{kind}.obj"), &[kind, "--subdivisions", "2"]);
        assert!(std::fs::read_to_string(p).unwrap().contains("\nf "));
    }
    assert_eq!(run(&["fixture", "torus", "--out", "x.obj"]).status.code(), Some(2));
}
