//! Named experiments: configuration, execution, CSV/JSON output and
//! regression comparison of output directories.

mod config;
mod experiments;
mod regression;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{judge, RateFit, Sidedness, Verdict};
use crate::widths::{TruncationCertificate, WidthCurve, CSV_HEADER};

pub use config::{ExperimentConfig, Overrides, KEYS};
pub use regression::{regression_check, RegressionReport, Tolerances};

pub const SCHEMA: &str = "widthlab-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    WidthsIdentity,
    RateRegular,
    RateLshape,
    RateSampling,
    #[serde(rename = "lemma2-suite")]
    Lemma2Suite,
    #[serde(rename = "theorem1-bracket")]
    Theorem1Bracket,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::WidthsIdentity,
        ExperimentId::RateRegular,
        ExperimentId::RateLshape,
        ExperimentId::RateSampling,
        ExperimentId::Lemma2Suite,
        ExperimentId::Theorem1Bracket,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ExperimentId::WidthsIdentity => "widths-identity",
            ExperimentId::RateRegular => "rate-regular",
            ExperimentId::RateLshape => "rate-lshape",
            ExperimentId::RateSampling => "rate-sampling",
            ExperimentId::Lemma2Suite => "lemma2-suite",
            ExperimentId::Theorem1Bracket => "theorem1-bracket",
        }
    }

    pub fn ids() -> Vec<&'static str> {
        Self::ALL.iter().map(|e| e.id()).collect()
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}` (expected one of {})", Self::ids().join(", "))))
    }

    /// Experiments that draw random sections, subspaces or data.
    pub fn randomized(self) -> bool {
        matches!(
            self,
            ExperimentId::WidthsIdentity | ExperimentId::Lemma2Suite | ExperimentId::Theorem1Bracket
        )
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub id: ExperimentId,
    pub theorems: &'static str,
    pub summary: &'static str,
    pub parameters: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    use ExperimentId::*;
    let entry = |id, theorems, summary, parameters| CatalogEntry {
        id,
        theorems,
        summary,
        parameters,
    };
    vec![
        entry(
            WidthsIdentity,
            "Theorem 2",
            "Bernstein widths equal approximation numbers on random and Poisson sections",
            "seed (required), truncation in [3, 64] = 12, samples in [1, 1000] = 20, t in (0, 4] = 1",
        ),
        entry(
            RateRegular,
            "Theorem 4; dyadic condition",
            "linear widths of the 1D Poisson problem against ((n+1) pi)^-t, fitted slope and dyadic ratios",
            "t in (0, 4] = 1, n_max power of two in [16, 4096] = 128, truncation > n_max + 1 = 1024",
        ),
        entry(
            RateLshape,
            "Theorems 6, 7",
            "best n-term and uniform truncation of a corner-singular solution on the L-shape; Lipschitz branch continuity",
            "k = 1, levels in [8, 11] = 10, n_max power of two in [128, 4096] = 1024",
        ),
        entry(
            RateSampling,
            "Theorems 4, 5",
            "piecewise-linear sampling reconstruction against linear information, d = 1, s = 1",
            "t in (1.5, 4] = 2, n_max power of two in [32, 4096] = 256, truncation > n_max + 1 = 1024",
        ),
        entry(
            Lemma2Suite,
            "Lemmas 2, 3",
            "equioscillation points of random subspaces, brute-force sweep cross-check, norm certificate",
            "seed (required), n_max in [1, 4] = 4, truncation in (n_max, 12] = 12, samples = 100",
        ),
        entry(
            Theorem1Bracket,
            "Theorem 1",
            "certified nonlinear-width lower bound against measured best n-term errors of Haar on the interval",
            "seed (required), t in (0.25, 3] = 1, levels in [3, 9] = 7, n_max power of two <= 64 = 16, samples = 64, C >= measured",
        ),
    ]
}

/// Human-readable catalog, one experiment per block.
pub fn list_experiments() -> String {
    let mut out = String::new();
    for e in catalog() {
        let _ = writeln!(out, "{:<18} {}", e.id.id(), e.theorems);
        let _ = writeln!(out, "{:<18} {}", "", e.summary);
        let _ = writeln!(out, "{:<18} parameters: {}", "", e.parameters);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub file: String,
    /// Width kind of a curve file, or `table`.
    pub kind: String,
    pub header: String,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub name: String,
    pub file: String,
    pub fit: RateFit,
    pub predicted: f64,
    pub margin: f64,
    pub sidedness: Sidedness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub name: String,
    pub theorem: String,
    pub file: String,
    pub verdict: Verdict,
    pub mandatory: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub file: String,
    pub certificate: TruncationCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub files: Vec<FileRecord>,
    pub fits: Vec<FitRecord>,
    pub verdicts: Vec<VerdictRecord>,
    pub certificates: Vec<CertificateRecord>,
    pub metrics: BTreeMap<String, f64>,
    pub started_at_unix: f64,
    pub wall_clock_seconds: f64,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn fit(&self, name: &str) -> Option<&FitRecord> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<&VerdictRecord> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    /// One line per verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "{:<12} {:<34} {:<28} {}{}",
                v.verdict.name(),
                v.name,
                v.theorem,
                v.detail,
                if v.mandatory { "" } else { " (informational)" }
            );
        }
        out
    }
}

/// Outputs collected while an experiment runs; written once at the end.
#[derive(Default)]
pub(crate) struct Recorder {
    prefix: String,
    files: Vec<(FileRecord, String)>,
    fits: Vec<FitRecord>,
    verdicts: Vec<VerdictRecord>,
    certificates: Vec<CertificateRecord>,
    metrics: BTreeMap<String, f64>,
}

impl Recorder {
    fn new(id: ExperimentId) -> Self {
        Recorder {
            prefix: id.id().to_string(),
            ..Default::default()
        }
    }

    fn push_file(&mut self, name: &str, kind: &str, header: &str, body: String, rows: usize) -> String {
        let file = format!("{}.{name}.csv", self.prefix);
        let content = format!("{header}\n{body}");
        self.files.push((
            FileRecord {
                file: file.clone(),
                kind: kind.to_string(),
                header: header.to_string(),
                rows,
            },
            content,
        ));
        file
    }

    pub(crate) fn curve(&mut self, name: &str, curve: &WidthCurve) -> String {
        let body = curve.csv_rows(&self.prefix);
        self.push_file(name, curve.kind.name(), CSV_HEADER, body, curve.samples().len())
    }

    pub(crate) fn table(&mut self, name: &str, header: &str, rows: &[String]) -> String {
        let mut body = String::new();
        for r in rows {
            body.push_str(r);
            body.push('\n');
        }
        self.push_file(name, "table", header, body, rows.len())
    }

    pub(crate) fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub(crate) fn certificate(&mut self, file: &str, certificate: TruncationCertificate) {
        self.certificates.push(CertificateRecord {
            file: file.to_string(),
            certificate,
        });
    }

    pub(crate) fn verdict(&mut self, name: &str, theorem: &str, file: &str, verdict: Verdict, mandatory: bool, detail: String) {
        self.verdicts.push(VerdictRecord {
            name: name.to_string(),
            theorem: theorem.to_string(),
            file: file.to_string(),
            verdict,
            mandatory,
            detail,
        });
    }

    pub(crate) fn check(&mut self, name: &str, theorem: &str, file: &str, ok: bool, detail: String) {
        let v = if ok { Verdict::Pass } else { Verdict::Fail };
        self.verdict(name, theorem, file, v, true, detail);
    }

    /// Records a fit and, when `theorem` is given, a mandatory verdict on it.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn fit(
        &mut self,
        name: &str,
        file: &str,
        fit: RateFit,
        predicted: f64,
        margin: f64,
        sidedness: Sidedness,
        theorem: Option<&str>,
    ) -> Verdict {
        let verdict = judge(&fit, predicted, margin, sidedness);
        let bound = match sidedness {
            Sidedness::TwoSided => format!("{predicted:.4} +- {margin}"),
            Sidedness::OneSided => format!("<= {predicted:.4} + {margin}"),
        };
        let detail = format!("slope {:.4} vs {bound} (R^2 {:.4})", fit.slope, fit.r_squared);
        self.metric(&format!("slope_{name}"), fit.slope);
        match theorem {
            Some(th) => self.verdict(name, th, file, verdict, true, detail),
            None => self.verdict(name, "-", file, verdict, false, detail),
        }
        self.fits.push(FitRecord {
            name: name.to_string(),
            file: file.to_string(),
            fit,
            predicted,
            margin,
            sidedness,
        });
        verdict
    }
}

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Runs one experiment and writes `<id>.json` plus one CSV per curve or
/// table into the configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut rec = Recorder::new(config.experiment);
    experiments::run(config, &mut rec)?;
    let passed = rec.verdicts.iter().filter(|v| v.mandatory).all(|v| v.verdict == Verdict::Pass);
    let report = ExperimentReport {
        schema: SCHEMA.to_string(),
        config: config.clone(),
        files: rec.files.iter().map(|(f, _)| f.clone()).collect(),
        fits: rec.fits,
        verdicts: rec.verdicts,
        certificates: rec.certificates,
        metrics: rec.metrics,
        started_at_unix: unix_seconds(started),
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        passed,
    };
    write_outputs(&config.out, &rec.files, &report)?;
    Ok(report)
}

fn write_outputs(dir: &Path, files: &[(FileRecord, String)], report: &ExperimentReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (rec, content) in files {
        let path = dir.join(&rec.file);
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join(format!("{}.json", report.config.experiment.id()));
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Incompatible(format!("{}: {e}", path.display())))
}

/// Exit status: 0 when every mandatory verdict passes, 1 on a failed
/// verdict, 2 for usage errors and 3 for numerical failures.
pub fn exit_code(result: &Result<ExperimentReport>) -> i32 {
    match result {
        Ok(r) if r.passed => 0,
        Ok(_) => 1,
        Err(e) => e.exit_code(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_covers_every_experiment() {
        let c = catalog();
        assert_eq!(c.len(), 6);
        let th = |id| c.iter().find(|e| e.id == id).unwrap().theorems;
        assert!(th(ExperimentId::RateLshape).contains("6") && th(ExperimentId::RateLshape).contains("7"));
        assert_eq!(th(ExperimentId::Lemma2Suite), "Lemmas 2, 3");
        let listing = list_experiments();
        for id in ExperimentId::ids() {
            assert!(listing.contains(id));
            assert_eq!(ExperimentId::parse(id).unwrap().id(), id);
        }
    }

    #[test]
    fn ids_round_trip_through_serde() {
        for id in ExperimentId::ALL {
            let s = serde_json::to_string(&id).unwrap();
            assert_eq!(s, format!("\"{}\"", id.id()));
            assert_eq!(serde_json::from_str::<ExperimentId>(&s).unwrap(), id);
        }
    }
}
