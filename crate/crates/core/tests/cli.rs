use std::path::Path;
use std::process::{Command, Output};

fn wvlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wvlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn wvlab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn exp_verify_passes_at_large_r() {
    let dir = tempfile::tempdir().unwrap();
    let out = wvlab(
        dir.path(),
        &["verify", "--fn", "exp", "--r", "50:400:8", "--psi", "m=1,alpha=2,t0=e", "--out", "v.csv", "--summary", "v.json"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("v.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,a,radius,max_deviation,verdict,excluded_samples"));
    assert_eq!(lines.filter(|l| l.contains(",pass,")).count(), 8);
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("v.json")).unwrap()).unwrap();
    assert!(summary.is_object());
}

#[test]
fn monomials_are_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = wvlab(dir.path(), &["verify", "--fn", "monomial{5}", "--r", "2:100:6", "--psi", "m=1,alpha=2,t0=e", "--tol", "1e-12"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failing_disks_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = wvlab(dir.path(), &["verify", "--fn", "exp", "--r", "e2:e3:4", "--psi", "m=1,alpha=2,t0=e", "--out", "v.csv"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify", "--fn", "nosuchfn", "--r", "2:4:3"][..],
        &["verify", "--r", "2:4:3"],
        &["profile", "--fn", "exp", "--r", "4:2:3"],
        &["frobnicate"],
        &["borel", "--range", "1:2"],
    ] {
        let out = wvlab(dir.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "fn = \"exp\"\nr = \"50:400:4\"\npsi = \"m=1,alpha=2,t0=e\"\nout = \"from_config.csv\"\n",
    )
    .unwrap();
    let out = wvlab(dir.path(), &["--config", "run.toml", "verify"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from_config.csv").exists());

    let out = wvlab(dir.path(), &["--config", "run.toml", "verify", "--out", "from_flag.csv", "--r", "60:70:2"]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("from_flag.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    std::fs::write(dir.path().join("bad.toml"), "colour = 3\n").unwrap();
    assert_eq!(code(&wvlab(dir.path(), &["--config", "bad.toml", "verify"])), 2);
}

#[test]
fn scales_export_and_construct() {
    let dir = tempfile::tempdir().unwrap();
    let out = wvlab(dir.path(), &["scales", "export", "--format", "csv", "--rmax", "2", "--out", "s.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.lines().count() > 10);

    let out = wvlab(dir.path(), &["construct", "--rmax", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["first_multiplicity"], 30);

    // A convergent weight is a failed hypothesis, not a usage error.
    assert_eq!(code(&wvlab(dir.path(), &["construct", "--psi", "m=1,alpha=2,t0=e", "--rmax", "1.1"])), 1);
    assert_eq!(code(&wvlab(dir.path(), &["construct", "--psi", "m=one", "--rmax", "2"])), 2);
}

#[test]
fn zeros_certificates_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = wvlab(dir.path(), &["zeros", "--r", "2.5", "--angles", "128", "--out", "z.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("theta,distance,bound_9r_over_sqrtA2,pass"));
    assert_eq!(csv.lines().count(), 129);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}
