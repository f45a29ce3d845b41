//! Comparison of a fresh output directory against golden reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{read_report, ExperimentReport, FileRecord};

/// Per-field tolerances. Widths and errors are relative, slopes absolute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub widths: f64,
    pub slopes: f64,
    pub errors: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            widths: 1e-10,
            slopes: 1e-6,
            errors: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub passed: bool,
    pub compared_values: usize,
    pub mismatches: Vec<String>,
}

fn reports_in(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            out.insert(name, path);
        }
    }
    Ok(out)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    if a == b || (a.is_nan() && b.is_nan()) {
        return true;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn is_width_kind(kind: &str) -> bool {
    matches!(kind, "linear" | "linear_dim" | "bernstein" | "bernstein_dim")
}

struct Comparison {
    tol: Tolerances,
    compared: usize,
    mismatches: Vec<String>,
}

impl Comparison {
    fn value(&mut self, what: String, golden: f64, fresh: f64, rel: f64) {
        self.compared += 1;
        if !close(golden, fresh, rel) {
            self.mismatches.push(format!("{what}: golden {golden:e}, fresh {fresh:e}"));
        }
    }

    fn slope(&mut self, what: String, golden: f64, fresh: f64) {
        self.compared += 1;
        if !((golden - fresh).abs() <= self.tol.slopes) {
            self.mismatches.push(format!("{what}: golden {golden}, fresh {fresh}"));
        }
    }

    fn csv(&mut self, record: &FileRecord, golden: &str, fresh: &str) -> Result<()> {
        let (g, f): (Vec<&str>, Vec<&str>) = (golden.lines().collect(), fresh.lines().collect());
        if g.first() != f.first() || g.len() != f.len() {
            return Err(Error::Incompatible(format!(
                "{}: header or row count differs ({} vs {} lines)",
                record.file,
                g.len(),
                f.len()
            )));
        }
        let rel = if is_width_kind(&record.kind) { self.tol.widths } else { self.tol.errors };
        for (row, (gl, fl)) in g.iter().zip(&f).enumerate().skip(1) {
            let (gc, fc): (Vec<&str>, Vec<&str>) = (gl.split(',').collect(), fl.split(',').collect());
            if gc.len() != fc.len() {
                return Err(Error::Incompatible(format!("{} row {row}: column count differs", record.file)));
            }
            for (col, (a, b)) in gc.iter().zip(&fc).enumerate() {
                match (a.parse::<f64>(), b.parse::<f64>()) {
                    (Ok(x), Ok(y)) => self.value(format!("{} row {row} column {col}", record.file), x, y, rel),
                    _ if a == b => {}
                    _ => self.mismatches.push(format!("{} row {row} column {col}: `{a}` vs `{b}`", record.file)),
                }
            }
        }
        Ok(())
    }

    fn report(&mut self, g: &ExperimentReport, f: &ExperimentReport, golden_dir: &Path, fresh_dir: &Path) -> Result<()> {
        let id = g.config.experiment.id();
        if g.schema != f.schema {
            return Err(Error::Incompatible(format!("{id}: schema {} vs {}", g.schema, f.schema)));
        }
        if g.config != f.config {
            return Err(Error::Incompatible(format!("{id}: reports come from different configurations")));
        }
        let files = |r: &ExperimentReport| r.files.iter().map(|x| (x.file.clone(), x.kind.clone(), x.header.clone())).collect::<Vec<_>>();
        let names = |r: &ExperimentReport| {
            (
                r.fits.iter().map(|x| x.name.clone()).collect::<Vec<_>>(),
                r.verdicts.iter().map(|x| x.name.clone()).collect::<Vec<_>>(),
                r.metrics.keys().cloned().collect::<Vec<_>>(),
                r.certificates.len(),
            )
        };
        if files(g) != files(f) || names(g) != names(f) {
            return Err(Error::Incompatible(format!("{id}: reports list different files, fits, verdicts or metrics")));
        }
        for record in &g.files {
            let read = |dir: &Path| {
                let p = dir.join(&record.file);
                std::fs::read_to_string(&p).map_err(|e| Error::io(p, e))
            };
            self.csv(record, &read(golden_dir)?, &read(fresh_dir)?)?;
        }
        for (a, b) in g.fits.iter().zip(&f.fits) {
            self.slope(format!("{id} fit {} slope", a.name), a.fit.slope, b.fit.slope);
            self.slope(format!("{id} fit {} intercept", a.name), a.fit.intercept, b.fit.intercept);
        }
        for (a, b) in g.verdicts.iter().zip(&f.verdicts) {
            self.compared += 1;
            if a.verdict != b.verdict {
                self.mismatches.push(format!("{id} verdict {}: {} vs {}", a.name, a.verdict.name(), b.verdict.name()));
            }
        }
        for (k, a) in &g.metrics {
            let b = f.metrics[k];
            if k.starts_with("slope") {
                self.slope(format!("{id} metric {k}"), *a, b);
            } else {
                self.value(format!("{id} metric {k}"), *a, b, self.tol.errors);
            }
        }
        for (a, b) in g.certificates.iter().zip(&f.certificates) {
            self.value(format!("{id} certificate {}", a.file), a.certificate.tail_ratio, b.certificate.tail_ratio, self.tol.widths);
        }
        Ok(())
    }
}

/// Compares every report of `golden_dir` with its counterpart in
/// `fresh_dir`. Structural differences are an [`Error::Incompatible`];
/// numeric differences beyond tolerance make the result fail.
pub fn regression_check(golden_dir: &Path, fresh_dir: &Path, tol: Tolerances) -> Result<RegressionReport> {
    let golden = reports_in(golden_dir)?;
    let fresh = reports_in(fresh_dir)?;
    if golden.is_empty() {
        return Err(Error::Incompatible(format!("no reports in {}", golden_dir.display())));
    }
    if golden.keys().ne(fresh.keys()) {
        return Err(Error::Incompatible(format!(
            "report sets differ: {:?} vs {:?}",
            golden.keys().collect::<Vec<_>>(),
            fresh.keys().collect::<Vec<_>>()
        )));
    }
    let mut cmp = Comparison {
        tol,
        compared: 0,
        mismatches: Vec::new(),
    };
    for (name, gpath) in &golden {
        let g = read_report(gpath)?;
        let f = read_report(&fresh[name])?;
        cmp.report(&g, &f, golden_dir, fresh_dir)?;
    }
    Ok(RegressionReport {
        passed: cmp.mismatches.is_empty(),
        compared_values: cmp.compared,
        mismatches: cmp.mismatches,
    })
}
