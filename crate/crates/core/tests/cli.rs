use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_steersim");

fn steersim(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{"name": "tiny", "psi": 0.7, "z": 0.2, "y_G": 1.0, "y_B": -0.05, "M": 0.24,
    "policy": {"alpha": 0.7, "beta": 0.7}, "runs": 4, "horizon": 500, "seed": 5}"#;

#[test]
fn run_writes_outputs_and_respects_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy().into_owned();

    let o = steersim(&[
        "run", "--config", &cfg, "--out", &out_s, "--stride", "50", "--arms", "regular",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("tiny_regular.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 10);
    assert!(!out.join("tiny_se.csv").exists());

    // Second run without --force must refuse.
    let o = steersim(&[
        "run", "--config", &cfg, "--out", &out_s, "--stride", "50", "--arms", "regular",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--force"));

    let o = steersim(&[
        "run",
        "--config",
        &cfg,
        "--out",
        &out_s,
        "--stride",
        "50",
        "--arms",
        "regular",
        "--force",
        "--threads",
        "2",
    ]);
    assert!(o.status.success());
    assert_eq!(
        fs::read_to_string(out.join("tiny_regular.csv")).unwrap(),
        csv
    );

    let o = steersim(&[
        "run",
        "--config",
        &cfg,
        "--out",
        &out_s,
        "--force",
        "--runs",
        "2",
        "--horizon",
        "100",
        "--seed",
        "6",
    ]);
    assert!(o.status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("tiny_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["runs"], 2);
    assert_eq!(meta["horizon"], 100);
    assert_eq!(meta["seed"], 6);
    assert_eq!(
        fs::read_to_string(out.join("tiny_se.csv"))
            .unwrap()
            .lines()
            .count(),
        101
    );
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"psi": 1.2, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0.24}"#,
    );
    let o = steersim(&["run", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("psi"));

    let unknown = write(
        dir.path(),
        "unknown.json",
        r#"{"psi": 0.5, "z": 0.2, "y_G": 1, "y_B": -0.05, "M": 0.24, "horizonn": 5}"#,
    );
    let o = steersim(&["solve", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("horizonn"));

    let good = write(dir.path(), "good.json", SMALL);
    let o = steersim(&["run", "--config", &good, "--arms", "fast"]);
    assert_eq!(o.status.code(), Some(2));

    let kappa = write(
        dir.path(),
        "kappa.json",
        r#"{"psi": 0.7, "z": 0.2, "y_G": 0.1, "y_B": -0.56, "M": 0.3, "runs": 1, "horizon": 10}"#,
    );
    let o = steersim(&[
        "run",
        "--config",
        &kappa,
        "--out",
        &dir.path().join("k").to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa"));
}

#[test]
fn solve_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "deep.json",
        r#"{"psi": 0.5, "z": 0.2, "y_G": 1.0, "y_B": -2.0, "M": 3.0}"#,
    );
    let o = steersim(&["solve", "--config", &cfg]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["case_label"], "Case2");
    assert_eq!(v["policy"]["alpha"], 0.0);
    assert_eq!(v["alternates"][0]["case_label"], "Case3");
}

#[test]
fn classify_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"psi": 0.1, "z": 0.1, "y_G": 0.1, "y_B": -1.0, "M": 1.0}"#,
    );
    let o = steersim(&["classify", "--config", &cfg]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("needs design"));
    let info = text
        .lines()
        .find(|l| l.starts_with("information only"))
        .unwrap();
    assert!(info.contains('✗') && info.contains("-0.79"));
    let sub = text
        .lines()
        .find(|l| l.starts_with("information + sublinear"))
        .unwrap();
    assert!(sub.contains('?'));
    let pay = text
        .lines()
        .find(|l| l.starts_with("linear payments"))
        .unwrap();
    assert!(pay.contains('✓'));
}
