use std::process::Command;

fn cli() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_besov-trace"));
    c.env_remove("BESOV_TRACE_CONFIG");
    c
}

#[test]
fn invalid_config_exits_with_two() {
    let out = cli()
        .args(["--s", "0.4", "verify", "g-energy"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("s − d/p > 0"), "{err}");
}

#[test]
fn unknown_config_key_exits_with_two() {
    let out = cli()
        .args(["--set", "sead=3", "verify", "g-energy"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_csv_has_one_row_per_bin() {
    let out = cli().args(["spectrum", "--csv"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h,dhat"));
    // h from s − d/p − 0.5 to s + 0.5 in steps of 0.05.
    assert_eq!(lines.count(), 31);
}

#[test]
fn verify_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .arg("--output-dir")
        .arg(dir.path())
        .args(["verify", "g-energy", "holder-calibration"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["experiments"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("report.json").exists());
    let csv = std::fs::read_to_string(dir.path().join("g-energy_energy.csv")).unwrap();
    assert!(csv.starts_with("j,A_j\n"));
}

#[test]
fn failing_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .arg("--output-dir")
        .arg(dir.path())
        .args(["--set", "holder_tolerance=0", "--set", "h_alpha_slack=-1"])
        .args(["verify", "holder-calibration"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "s = 0.4\n").unwrap();
    let status = |extra: &[&str]| {
        cli()
            .arg("--config")
            .arg(&path)
            .arg("--output-dir")
            .arg(dir.path())
            .args(extra)
            .args(["verify", "g-energy"])
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(status(&[]), Some(2));
    assert_eq!(status(&["--s", "2"]), Some(0));
}

#[test]
fn hn_check_passes_on_the_default_wavelet() {
    let out = cli().args(["wavelet", "check-hn"]).output().unwrap();
    assert!(out.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["verdict"], "holds");
}
