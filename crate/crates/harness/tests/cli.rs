//! The `fpme` binary: subcommands, flags and exit codes.

use std::process::Command;

fn fpme() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fpme"));
    c.env("RUST_LOG", "error");
    c
}

#[test]
fn passing_run_exits_zero_and_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let status = fpme()
        .args(["rates-audit", "--m", "2", "--format", "csv", "--out"])
        .arg(dir.path())
        .env("FPME_CACHE_DIR", dir.path().join("c"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("rates-audit.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn configuration_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpme().args(["hydro", "--gamma", "2.5", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));

    let missing = fpme().args(["pde", "--config", "/nonexistent/x.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    // at γ = 0.5 the Y1 slope is about −1, outside −0.5 ± 0.3
    let dir = tempfile::tempdir().unwrap();
    let out = fpme()
        .args(["operators", "--gamma", "0.5", "--n", "256", "--n", "512", "--n", "1024", "--no-cache", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("y1_slope"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("inv.toml");
    std::fs::write(&cfg, "mode = \"invariance\"\n[invariance]\nthinning_events = 2000\n").unwrap();
    let status = fpme()
        .args(["invariance", "--m", "2", "--gamma", "1.0", "--seed", "3", "--format", "md", "--jobs", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let md = std::fs::read_to_string(dir.path().join("invariance.md")).unwrap();
    assert!(md.contains("master seed: 3"));
    assert!(md.contains("m=2 gamma=1"));
}
