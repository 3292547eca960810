use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use infogeo_cli::RunReport;

fn infogeo(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infogeo"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn verify_passes_and_writes_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let o = infogeo(&["verify-geometry"], dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let text = fs::read_to_string(dir.path().join("verify-geometry.json")).unwrap();
    let report = RunReport::from_json(&text).unwrap();
    assert_eq!(report.to_json(), text);
    assert_eq!(report.summary["scalar_curvature_3d"], -1.0);
    assert_eq!(report.summary["scalar_curvature_2d"], -0.5);
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.starts_with("# infogeo verify v1\n"));
}

#[test]
fn format_selects_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        infogeo(&["geodesics", "--format", "csv"], dir.path())
            .status
            .code(),
        Some(0)
    );
    assert!(dir.path().join("geodesic_3d.csv").exists());
    assert!(!dir.path().join("geodesics.json").exists());

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        infogeo(&["geodesics", "--format", "json"], dir.path())
            .status
            .code(),
        Some(0)
    );
    assert!(!dir.path().join("geodesic_3d.csv").exists());
    assert!(dir.path().join("geodesics.json").exists());
}

#[test]
fn invalid_config_exits_with_two_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "[geodesic]\nsigma0 = -1\n").unwrap();
    let out = dir.path().join("out");
    let o = infogeo(
        &["verify-geometry", "--config", cfg.to_str().unwrap()],
        &out,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    fs::write(&cfg, "[geodesic]\nsigma1 = 1\n").unwrap();
    assert_eq!(
        infogeo(&["ige", "--config", cfg.to_str().unwrap()], &out)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        infogeo(&["ige", "--config", "/nonexistent.ini"], &out)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        infogeo(&["ige", "--tol", "-1"], &out).status.code(),
        Some(2)
    );
}

#[test]
fn softening_rejects_a_single_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("3d.ini");
    fs::write(&cfg, "[model]\nkind = 3d\n").unwrap();
    let o = infogeo(
        &["softening", "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = infogeo(&["jacobi"], &a);
    let ob = infogeo(&["jacobi", "--jobs", "3"], &b);
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(oa.stdout, ob.stdout);
    for name in ["jacobi.json", "jacobi_3d.csv", "jacobi_2d.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn failing_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = infogeo(&["ige"], dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    let report =
        RunReport::from_json(&fs::read_to_string(dir.path().join("ige.json")).unwrap()).unwrap();
    assert_eq!(o.status.code(), Some(if report.passed { 0 } else { 1 }));
    assert_eq!(stdout.lines().count(), report.checks.len());
}
