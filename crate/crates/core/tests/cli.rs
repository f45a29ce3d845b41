use std::process::Command;

fn widthlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_widthlab"))
}

#[test]
fn list_shows_every_experiment() {
    let out = widthlab().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["widths-identity", "rate-regular", "rate-lshape", "rate-sampling", "lemma2-suite", "theorem1-bracket"] {
        assert!(text.contains(id), "{id} missing from\n{text}");
    }
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let status = widthlab()
        .args(["--experiment", "rate-regular", "--nmax", "64", "--t", "2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("rate-regular.json").exists());
    assert!(dir.path().join("rate-regular.linear.csv").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["--experiment", "lemma2-suite"],
        &["--experiment", "no-such-thing"],
        &["--experiment", "rate-sampling", "--t", "1"],
        &["--bogus-flag"],
    ];
    for args in cases {
        let out = widthlab().args(args).arg("--out").arg(dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# regular rate\nexperiment = rate-regular\nt = 0.5\nn_max = 64\n").unwrap();
    let out = dir.path().join("out");
    let status = widthlab().arg("--config").arg(&cfg).args(["--nmax", "128", "--out"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let report = widthlab::runner::read_report(&out.join("rate-regular.json")).unwrap();
    assert_eq!(report.config.n_max, 128);
    assert_eq!(report.config.t, 0.5);
}

#[test]
fn check_compares_directories() {
    let dir = tempfile::tempdir().unwrap();
    let run = widthlab()
        .args(["--experiment", "widths-identity", "--seed", "3", "--truncation", "8", "--nmax", "6", "--samples", "4", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(run.success());
    let same = widthlab().arg("check").arg(dir.path()).arg(dir.path()).status().unwrap();
    assert_eq!(same.code(), Some(0));
    let empty = tempfile::tempdir().unwrap();
    let mismatch = widthlab().arg("check").arg(dir.path()).arg(empty.path()).status().unwrap();
    assert_eq!(mismatch.code(), Some(2));
}
