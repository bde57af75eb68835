use std::path::PathBuf;
use std::process::{Command, Output};

use morseframe::cli::{from_json, to_json, ProjectReport, Report};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_morseframe"));
    cmd.env_remove("MORSEFRAME_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("morseframe-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn project_examples() {
    let out = run(&["project", "--values", "0.4,-0.4", "--kappa", "0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let r: ProjectReport = from_json(&stdout(&out)).unwrap();
    assert!((r.c_prime[0] - 0.1).abs() < 1e-15 && (r.c_prime[1] + 0.1).abs() < 1e-15);
    assert_eq!(r.face, vec![vec![2], vec![1]]);

    let r: ProjectReport = from_json(&stdout(&run(&["project", "--values", "0,0,0", "--kappa", "1"]))).unwrap();
    assert_eq!(r.c_prime, vec![0.0; 3]);
    assert_eq!(r.face, vec![vec![1, 2, 3]]);

    let r: ProjectReport = from_json(&stdout(&run(&["project", "--values", "0.5", "--kappa", "0.1"]))).unwrap();
    assert_eq!(r.c_prime, vec![0.0]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["project", "--values", "a,b", "--kappa", "1"]).status.code(), Some(2));
    assert_eq!(run(&["project", "--values", "1", "--kappa", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--scene", "klein_bottle"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--grid", "32"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--json", "{\"scene\": 3}"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--json", "/nonexistent/config.json"]).status.code(), Some(4));
    assert_eq!(
        run(&["analyze", "--grid", "64", "--delta-ext", "3"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["analyze", "--grid", "64", "--out", "/nonexistent/dir/r.json"]).status.code(),
        Some(4)
    );
    let bad_seed = bin().args(["verify", "--rounds", "5"]).env("MORSEFRAME_SEED", "abc").output().unwrap();
    assert_eq!(bad_seed.status.code(), Some(2));
}

#[test]
fn analyze_verdicts() {
    let r: Report = from_json(&stdout(&run(&["analyze", "--scene", "two_cosines", "--a", "1", "--b", "1", "--grid", "256"]))).unwrap();
    assert!(r.special_before.special);
    assert_eq!((r.p, r.q, r.r), (1, 2, 1));
    assert!(r.special_after.is_none());

    let r: Report = from_json(&stdout(&run(&["analyze", "--a", "3", "--grid", "128"]))).unwrap();
    assert!(!r.special_before.special);
    assert!(!r.special_before.condition_i);

    let r: Report = from_json(&stdout(&run(&["analyze", "--json", "{\"scene\":\"sphere_height\",\"grid_n\":64}"]))).unwrap();
    assert_eq!(r.q, 0);
    assert!(r.special_before.special);
}

#[test]
fn normalize_and_verify() {
    let dir = scratch("normalize");
    let path = dir.join("report.json");
    let out = run(&[
        "normalize", "--a", "3", "--b", "1", "--grid", "128", "--homotopy-samples", "5",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let report: Report = from_json(&text).unwrap();
    assert_eq!(to_json(&report).unwrap(), text);
    assert!((report.scaled_values[0] - 1.0 / 3.0).abs() < 1e-8);
    assert!((report.scaled_values[1] + 1.0 / 3.0).abs() < 1e-8);
    assert!(report.special_after.as_ref().unwrap().special);
    assert_eq!(report.homotopy.as_ref().unwrap().samples.len(), 5);

    let v = run(&["verify", "--json", path.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(stdout(&v).lines().all(|l| l.starts_with("PASS")));

    // a tampered projection fails the certificate
    let mut bad = report.clone();
    bad.c_prime[0] += 1e-3;
    let bad_path = dir.join("bad.json");
    std::fs::write(&bad_path, to_json(&bad).unwrap()).unwrap();
    let v = run(&["verify", "--json", bad_path.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(3));
    assert!(stdout(&v).contains("FAIL kkt"));
}

#[test]
fn homotopy_on_special_scene_keeps_its_face() {
    let r: Report = from_json(&stdout(&run(&["normalize", "--grid", "128", "--homotopy-samples", "5"]))).unwrap();
    let h = r.homotopy.unwrap();
    assert!(h.constant_face);
    let ts: Vec<f64> = h.samples.iter().map(|s| s.t).collect();
    assert_eq!(ts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn plots() {
    let dir = scratch("plots");
    let out = run(&["plot", "--a", "3", "--grid", "128", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let portrait = std::fs::read_to_string(dir.join("portrait.svg")).unwrap();
    assert_eq!(portrait.matches("class=\"cp saddle\"").count(), 2);
    assert_eq!(portrait.matches("class=\"cp min\"").count(), 1);
    assert_eq!(portrait.matches("class=\"cp max\"").count(), 1);
    assert_eq!(portrait.matches("class=\"separatrix").count(), 8);
    assert!(portrait.contains("class=\"saddle-level\""));
    let hex = std::fs::read_to_string(dir.join("permutohedron.svg")).unwrap();
    assert_eq!(hex.matches("class=\"vertex\"").count(), 2);

    let values_dir = scratch("plot-values");
    let out = run(&["plot", "--values", "0.9,-0.2,-0.1", "--kappa", "1", "--out", values_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let first = std::fs::read(values_dir.join("permutohedron.svg")).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).matches("class=\"vertex\"").count(), 6);
    run(&["plot", "--values", "0.9,-0.2,-0.1", "--kappa", "1", "--out", values_dir.to_str().unwrap()]);
    assert_eq!(std::fs::read(values_dir.join("permutohedron.svg")).unwrap(), first);

    let out = run(&["plot", "--values", "1,2,3,4", "--out", values_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_suite() {
    let a = bin().args(["verify", "--rounds", "30"]).env("MORSEFRAME_SEED", "11").output().unwrap();
    let b = bin().args(["verify", "--rounds", "30"]).env("MORSEFRAME_SEED", "11").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 11);
}
