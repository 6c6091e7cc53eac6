use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kantorovich"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn figure_preset_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = run(&["figure", "--preset", "fig3"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv_a = std::fs::read(a.path().join("fig3.csv")).unwrap();
    let csv_b = std::fs::read(b.path().join("fig3.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("z,f,w=5,w=10,w=15\n"));
    assert_eq!(text.lines().count(), 802);
    let svg = std::fs::read_to_string(a.path().join("fig3.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert!(svg.contains(">S_w, w=15</text>"));
    assert!(a.path().join("fig3.report.json").exists());
}

#[test]
fn failed_audit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("audit_unnormalized.json");
    let out = run(&["audit-kernel", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("chi2 FAIL"));
}

#[test]
fn passing_audit_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("audit_combo.json");
    let out = run(&["audit-kernel", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.path().join("audit_combo.report.json")).unwrap();
    assert!(report.contains("\"m_hat\""));
}

#[test]
fn invalid_config_exits_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"operator": {"variant": "2"}, "signal": {"preset": "f1"},
            "w_list": [5, 5], "grid": {"min": -1, "max": 1, "count": 3}}"#,
    );
    let out = run(&["convergence", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("w_list[1]"));

    let out = run(&["figure", "--preset", "fig9"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["figure"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn uncertifiable_truncation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"operator": {"variant": "1", "kernel": {"name": "fejer"}}, "signal": {"preset": "f1"},
            "w_list": [5], "grid": {"min": -1, "max": 1, "count": 3}}"#,
    );
    let out = run(
        &["figure", "--config", cfg.to_str().unwrap(), "--tolerance", "1e-12"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn luxemburg_flag_reaches_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"name": "lux", "operator": {"variant": "2"}, "signal": {"preset": "hat"},
            "w_list": [5, 10], "grid": {"min": -2, "max": 2, "count": 41},
            "metrics": {"window": [-4, 4], "modular": [{"phi": {"kind": "power", "p": 2}}]}}"#,
    );
    let mut values = Vec::new();
    for conv in ["standard", "paper"] {
        let out = run(
            &["convergence", "--config", cfg.to_str().unwrap(), "--luxemburg", conv],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        let report = std::fs::read_to_string(dir.path().join("lux.report.json")).unwrap();
        let expected = if conv == "standard" { "\"standard\"" } else { "\"paper_variant\"" };
        assert!(report.contains(&format!("\"luxemburg\": {expected}")));
        values.push(std::fs::read_to_string(dir.path().join("lux.csv")).unwrap());
    }
    assert_ne!(values[0], values[1]);
}

#[test]
fn compare_classical_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("compare_hat.json");
    let out = run(&["compare-classical", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("compare_hat.csv")).unwrap();
    assert!(csv.starts_with("z,kantorovich w=5,classical w=5,"));
}
