use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn kawahara(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_kawahara")).args(args).output().unwrap()
}

fn record(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap()
}

#[test]
fn spectrum_at_l_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = kawahara(&["spectrum", "--N", "3", "--out", dir.path().to_str().unwrap(), "--csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = record(dir.path(), "spectrum");
    let rows = r["payload"]["lambda"].as_array().unwrap();
    let lambda = |n: i64| rows.iter().find(|p| p[0] == n).unwrap()[1].as_f64().unwrap();
    assert_eq!(lambda(0), 0.0);
    assert_eq!(lambda(2), 38.0);
    assert_eq!(lambda(3), 267.0);
    assert_eq!(lambda(-2), -38.0);
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("n,lambda\n"));
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(kawahara(&["nonsense"]).status.code(), Some(64));
    assert_eq!(kawahara(&["evolve", "--N", "-3"]).status.code(), Some(64));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(kawahara(&["observability", "--l", "2.0", "--out", out]).status.code(), Some(64));
    assert_eq!(kawahara(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"N": 5, "L": 2.0}"#).unwrap();
    let out = dir.path().to_str().unwrap();
    let run = kawahara(&["spectrum", "--config", cfg.to_str().unwrap(), "--N", "2", "--out", out]);
    assert_eq!(run.status.code(), Some(0));
    let r = record(dir.path(), "spectrum");
    assert_eq!(r["config"]["N"], 2);
    assert_eq!(r["config"]["L"], 2.0);
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let run = kawahara(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(run.status.code(), Some(64));
}

#[test]
fn free_target_control_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = kawahara(&["control", "--target", "free", "--N", "8", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = record(dir.path(), "control");
    let s = &r["payload"]["solution"];
    assert!(s["residual_0"].as_f64().unwrap() < 1e-12);
    assert!(s["residual_T"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["accepted"], true);
}

#[test]
fn carleman_reports_rejection_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = kawahara(&["carleman", "--family", "2", "--s-count", "5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let r = record(dir.path(), "carleman");
    assert_eq!(r["flags"]["positivity"], false);
    assert_eq!(r["accepted"], false);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = kawahara(&["evolve", "--samples", "3", "--seed", "11", "--csv", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["evolve.json", "evolve.csv", "evolve_plot.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
}
