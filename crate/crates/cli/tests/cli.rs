use assert_cmd::Command;

fn s3nodal(dir: &std::path::Path) -> Command {
    let mut cmd = Command::cargo_bin("s3nodal").unwrap();
    cmd.arg("--out-dir").arg(dir).env_remove("S3NODAL_SEED");
    cmd
}

#[test]
fn zeros_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = s3nodal(dir.path())
        .args(["zeros", "-n", "5", "-m", "5", "--emit-svg"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("zeros: 5, index sum: 5"));
    let csv = std::fs::read_to_string(dir.path().join("zeros_n5_m5_seed1_i0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(dir.path().join("zeros_n5_m5_seed1_i0.svg").exists());
}

#[test]
fn ensemble_csv_is_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "2")] {
        s3nodal(dir.path())
            .args(["--threads", threads, "ensemble", "-n", "4", "-m", "2", "--samples", "8"])
            .assert()
            .success();
    }
    let name = "ensemble_n4_m2_seed1.csv";
    assert_eq!(
        std::fs::read(a.path().join(name)).unwrap(),
        std::fs::read(b.path().join(name)).unwrap()
    );
}

#[test]
fn config_file_env_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n = 3\nm = 3\nseed = 2\nsamples = 4\n").unwrap();
    s3nodal(dir.path())
        .arg("--config")
        .arg(&cfg)
        .env("S3NODAL_SEED", "9")
        .args(["ensemble", "--samples", "3"])
        .assert()
        .success();
    let csv = std::fs::read_to_string(dir.path().join("ensemble_n3_m3_seed9.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn surface_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    s3nodal(dir.path())
        .args(["surface", "-n", "3", "-m", "1", "--level", "3"])
        .assert()
        .success();
    let off = std::fs::read_to_string(dir.path().join("surface_n3_m1_seed1_i0_l3.off")).unwrap();
    assert!(off.starts_with("OFF"));
    s3nodal(dir.path())
        .args(["kernels-table", "--n-max", "3"])
        .assert()
        .success();
    s3nodal(dir.path())
        .args(["kacrice-table", "--n-max", "3"])
        .assert()
        .success();
    assert!(dir.path().join("kernels_nmax3.csv").exists());
    assert!(dir.path().join("kacrice_nmax3.csv").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = s3nodal(dir.path())
        .args(["zeros", "-n", "3", "-m", "2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("empty"));
    let out = s3nodal(dir.path())
        .args(["--set", "nonsense=1", "sample"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn fit_needs_three_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = s3nodal(dir.path())
        .args(["fit", "--n-max", "2", "--samples", "2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("insufficient data"));
}
