use std::path::Path;

use widthlab::runner::{regression_check, run_experiment, ExperimentConfig, ExperimentReport, Overrides, Tolerances};
use widthlab::Error;

fn config(text: &str, out: &Path) -> ExperimentConfig {
    let mut o = Overrides::parse(text).unwrap();
    o.set("out", out.display().to_string()).unwrap();
    ExperimentConfig::resolve(&o).unwrap()
}

fn run(text: &str, out: &Path) -> ExperimentReport {
    run_experiment(&config(text, out)).unwrap()
}

fn csv_rows(dir: &Path, file: &str) -> Vec<String> {
    std::fs::read_to_string(dir.join(file)).unwrap().lines().skip(1).map(String::from).collect()
}

#[test]
fn widths_identity_on_random_sections() {
    let dir = tempfile::tempdir().unwrap();
    let r = run("experiment = widths-identity\ntruncation = 12\nseed = 7", dir.path());
    assert!(r.passed);
    assert!(r.metric("max_rel_gap_random").unwrap() <= 1e-10);
    assert!(r.metric("max_rel_gap_poisson_rotated").unwrap() <= 1e-10);
}

#[test]
fn regular_rate_on_the_interval() {
    let dir = tempfile::tempdir().unwrap();
    let r = run("experiment = rate-regular\nt = 1\nn_max = 128", dir.path());
    assert!(r.passed);
    let slope = r.fit("linear_dim").unwrap().fit.slope;
    assert!((slope + 1.0).abs() <= 0.1);
    // n = 0..=128
    for f in &r.files {
        assert_eq!(csv_rows(dir.path(), &f.file).len(), f.rows);
    }
    assert_eq!(r.files[0].rows, 129);
    assert!(r.certificates[0].certificate.exact);
}

#[test]
fn sampling_against_linear_information() {
    let dir = tempfile::tempdir().unwrap();
    let r = run("experiment = rate-sampling\nt = 2", dir.path());
    assert!(r.passed, "{}", r.summary());
    let s = r.fit("sampling").unwrap().fit.slope;
    let l = r.fit("linear_dim").unwrap().fit.slope;
    assert!((s + 1.0).abs() <= 0.15 && (l + 2.0).abs() <= 0.1 && s - l >= 0.7);
    // dyadic n = 16..=256
    assert_eq!(csv_rows(dir.path(), "rate-sampling.sampling.csv").len(), 5);
}

#[test]
fn exit_codes_by_outcome() {
    use widthlab::runner::exit_code;
    let dir = tempfile::tempdir().unwrap();
    let mut r = run("experiment = rate-regular\nn_max = 64", dir.path());
    assert_eq!(exit_code(&Ok(r.clone())), 0);
    r.passed = false;
    assert_eq!(exit_code(&Ok(r)), 1);
    assert_eq!(exit_code(&Err(Error::Config("x".into()))), 2);
    assert_eq!(exit_code(&Err(Error::Incompatible("x".into()))), 2);
    assert_eq!(exit_code(&Err(Error::Degenerate("x".into()))), 3);
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = "experiment = lemma2-suite\nseed = 11\nsamples = 30";
    let ra = run(cfg, a.path());
    let rb = run(cfg, b.path());
    for f in &ra.files {
        let x = std::fs::read(a.path().join(&f.file)).unwrap();
        let y = std::fs::read(b.path().join(&f.file)).unwrap();
        assert_eq!(x, y, "{}", f.file);
    }
    assert!(regression_check(a.path(), b.path(), Tolerances::default()).unwrap().passed);
    assert_eq!(rb.files.len(), ra.files.len());
}

fn perturb_value_column(dir: &Path, file: &str, factor: f64) {
    let path = dir.join(file);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut out = String::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            out.push_str(line);
        } else {
            let mut cols: Vec<String> = line.split(',').map(String::from).collect();
            let v: f64 = cols[3].parse().unwrap();
            cols[3] = format!("{:.16e}", v * factor);
            out.push_str(&cols.join(","));
        }
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}

fn copy_dir(from: &Path, to: &Path) {
    for e in std::fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        std::fs::copy(&p, to.join(p.file_name().unwrap())).unwrap();
    }
}

#[test]
fn regression_tolerances() {
    let golden = tempfile::tempdir().unwrap();
    run("experiment = rate-regular\nt = 2\nn_max = 64", golden.path());
    assert!(regression_check(golden.path(), golden.path(), Tolerances::default()).unwrap().passed);

    // widths moved by 1e-12 relative stay within tolerance
    let fresh = tempfile::tempdir().unwrap();
    copy_dir(golden.path(), fresh.path());
    perturb_value_column(fresh.path(), "rate-regular.linear.csv", 1.0 + 1e-12);
    assert!(regression_check(golden.path(), fresh.path(), Tolerances::default()).unwrap().passed);

    // widths moved by 1e-8 do not
    perturb_value_column(fresh.path(), "rate-regular.linear.csv", 1.0 + 1e-8);
    let r = regression_check(golden.path(), fresh.path(), Tolerances::default()).unwrap();
    assert!(!r.passed && r.mismatches.iter().all(|m| m.contains("linear.csv")));

    // a slope moved by 1e-3 fails
    let fresh = tempfile::tempdir().unwrap();
    copy_dir(golden.path(), fresh.path());
    let path = fresh.path().join("rate-regular.json");
    let mut report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let slope = report["fits"][0]["fit"]["slope"].as_f64().unwrap();
    report["fits"][0]["fit"]["slope"] = serde_json::json!(slope + 1e-3);
    std::fs::write(&path, serde_json::to_string(&report).unwrap()).unwrap();
    let r = regression_check(golden.path(), fresh.path(), Tolerances::default()).unwrap();
    assert!(!r.passed);
    assert!(r.mismatches.iter().any(|m| m.contains("slope")));
}

#[test]
fn regression_rejects_schema_mismatch() {
    let golden = tempfile::tempdir().unwrap();
    run("experiment = rate-regular", golden.path());
    let other = tempfile::tempdir().unwrap();
    run("experiment = rate-regular\nn_max = 256", other.path());
    assert!(matches!(
        regression_check(golden.path(), other.path(), Tolerances::default()),
        Err(Error::Incompatible(_))
    ));

    let fresh = tempfile::tempdir().unwrap();
    copy_dir(golden.path(), fresh.path());
    let path = fresh.path().join("rate-regular.json");
    let text = std::fs::read_to_string(&path).unwrap().replace("widthlab-report/1", "widthlab-report/0");
    std::fs::write(&path, text).unwrap();
    assert!(matches!(
        regression_check(golden.path(), fresh.path(), Tolerances::default()),
        Err(Error::Incompatible(_))
    ));

    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(
        regression_check(golden.path(), empty.path(), Tolerances::default()),
        Err(Error::Incompatible(_))
    ));
}

#[test]
fn condition_bound_below_measured_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("experiment = theorem1-bracket\nseed = 1\nC = 1.0\nlevels = 4\nsamples = 4", dir.path());
    assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
}
