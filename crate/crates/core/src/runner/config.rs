//! Flat `key = value` configuration with layered overrides: defaults, then
//! a config file, then command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ExperimentId;

/// Keys accepted in config files and as flags.
pub const KEYS: [&str; 10] = ["experiment", "t", "k", "C", "n_max", "truncation", "levels", "seed", "samples", "out"];

/// One layer of raw `key = value` settings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    entries: BTreeMap<String, String>,
}

fn canonical_key(key: &str) -> Option<&'static str> {
    let key = match key {
        "nmax" | "n-max" => "n_max",
        "c" => "C",
        other => other,
    };
    KEYS.iter().copied().find(|k| *k == key)
}

impl Overrides {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Overrides::default();
        let mut problems = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!("line {}: expected `key = value`, got `{line}`", lineno + 1));
                continue;
            };
            if let Err(e) = out.set(key.trim(), value.trim()) {
                problems.push(format!("line {}: {e}", lineno + 1));
            }
        }
        if problems.is_empty() {
            Ok(out)
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = canonical_key(key).ok_or_else(|| {
            Error::Config(format!("unknown key `{key}` (expected one of {})", KEYS.join(", ")))
        })?;
        let value = value.into();
        if value.is_empty() {
            return Err(Error::Config(format!("`{key}` has an empty value")));
        }
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Entries of `other` replace those of `self`.
    pub fn layer(mut self, other: &Overrides) -> Self {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
        self
    }
}

/// Fully resolved parameters of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub t: f64,
    pub k: f64,
    /// Upper bound on the basis condition; `None` uses the measured one.
    #[serde(rename = "C")]
    pub condition: Option<f64>,
    pub n_max: usize,
    pub truncation: usize,
    pub levels: u32,
    pub seed: Option<u64>,
    pub samples: usize,
    #[serde(skip)]
    pub out: PathBuf,
}

struct Defaults {
    t: f64,
    n_max: usize,
    truncation: usize,
    levels: u32,
    samples: usize,
}

fn defaults(id: ExperimentId) -> Defaults {
    use ExperimentId::*;
    match id {
        WidthsIdentity => Defaults { t: 1.0, n_max: 10, truncation: 12, levels: 0, samples: 20 },
        RateRegular => Defaults { t: 1.0, n_max: 128, truncation: 1024, levels: 0, samples: 0 },
        RateSampling => Defaults { t: 2.0, n_max: 256, truncation: 1024, levels: 0, samples: 0 },
        RateLshape => Defaults { t: 1.0, n_max: 1024, truncation: 0, levels: 10, samples: 0 },
        Lemma2Suite => Defaults { t: 1.0, n_max: 4, truncation: 12, levels: 0, samples: 100 },
        Theorem1Bracket => Defaults { t: 1.0, n_max: 16, truncation: 0, levels: 7, samples: 64 },
    }
}

struct Diagnostics(Vec<String>);

impl Diagnostics {
    fn parse<T: std::str::FromStr>(&mut self, layer: &Overrides, key: &str) -> Option<T> {
        let raw = layer.get(key)?;
        match raw.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.0.push(format!("`{key}` = `{raw}` is not a valid {}", std::any::type_name::<T>()));
                None
            }
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }
}

impl ExperimentConfig {
    /// Resolves a merged layer into a validated configuration. Every
    /// problem found is reported in one usage error.
    pub fn resolve(layer: &Overrides) -> Result<Self> {
        let id = ExperimentId::parse(layer.get("experiment").ok_or_else(|| {
            Error::Config(format!("`experiment` is required (one of {})", ExperimentId::ids().join(", ")))
        })?)?;
        let d = defaults(id);
        let mut diag = Diagnostics(Vec::new());
        let cfg = ExperimentConfig {
            experiment: id,
            t: diag.parse(layer, "t").unwrap_or(d.t),
            k: diag.parse(layer, "k").unwrap_or(1.0),
            condition: diag.parse(layer, "C"),
            n_max: diag.parse(layer, "n_max").unwrap_or(d.n_max),
            truncation: diag.parse(layer, "truncation").unwrap_or(d.truncation),
            levels: diag.parse(layer, "levels").unwrap_or(d.levels),
            seed: diag.parse(layer, "seed"),
            samples: diag.parse(layer, "samples").unwrap_or(d.samples),
            out: layer.get("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate(&mut diag);
        if diag.0.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(format!("{}: {}", id.id(), diag.0.join("; "))))
        }
    }

    fn validate(&self, diag: &mut Diagnostics) {
        use ExperimentId::*;
        let (t, n, big_n) = (self.t, self.n_max, self.truncation);
        if self.experiment.randomized() {
            diag.check(self.seed.is_some(), || "`seed` is required for this randomized experiment".into());
        }
        diag.check(self.k == 1.0 || self.experiment == RateLshape, || "`k` only applies to rate-lshape".into());
        diag.check(self.condition.is_none() || self.experiment == Theorem1Bracket, || {
            "`C` only applies to theorem1-bracket".into()
        });
        match self.experiment {
            WidthsIdentity => {
                diag.check(t > 0.0 && t <= 4.0, || format!("t = {t} must lie in (0, 4]"));
                diag.check((3..=64).contains(&big_n), || format!("truncation = {big_n} must lie in [3, 64]"));
                diag.check(n + 2 <= big_n, || format!("n_max = {n} must be at most truncation - 2 = {}", big_n.saturating_sub(2)));
                diag.check((1..=1000).contains(&self.samples), || "samples must lie in [1, 1000]".into());
            }
            RateRegular | RateSampling => {
                let (lo, tmin) = if self.experiment == RateRegular { (64, 0.0) } else { (128, 1.5) };
                diag.check(t > tmin && t <= 4.0, || format!("t = {t} must lie in ({tmin}, 4]"));
                diag.check(n.is_power_of_two() && (lo..=4096).contains(&n), || {
                    format!("n_max = {n} must be a power of two in [{lo}, 4096]")
                });
                diag.check(big_n > n + 1 && big_n <= 1 << 16, || {
                    format!("truncation = {big_n} must exceed n_max + 1 and be at most 65536")
                });
            }
            RateLshape => {
                diag.check(self.k == 1.0, || format!("k = {} is not supported; the corner experiment uses k = 1", self.k));
                diag.check((8..=11).contains(&self.levels), || format!("levels = {} must lie in [8, 11]", self.levels));
                diag.check(n.is_power_of_two() && (256..=4096).contains(&n), || {
                    format!("n_max = {n} must be a power of two in [256, 4096]")
                });
            }
            Lemma2Suite => {
                diag.check((1..=4).contains(&n), || format!("n_max = {n} (subspace dimension) must lie in [1, 4]"));
                diag.check(big_n > n && big_n <= 12, || format!("truncation = {big_n} must exceed n_max and be at most 12"));
                diag.check((1..=10_000).contains(&self.samples), || "samples must lie in [1, 10000]".into());
            }
            Theorem1Bracket => {
                diag.check(t > 0.25 && t <= 3.0, || format!("t = {t} must lie in (0.25, 3]"));
                diag.check((3..=9).contains(&self.levels), || format!("levels = {} must lie in [3, 9]", self.levels));
                diag.check(n.is_power_of_two() && n <= 64, || format!("n_max = {n} must be a power of two at most 64"));
                diag.check((1..=1000).contains(&self.samples), || "samples must lie in [1, 1000]".into());
                if let Some(c) = self.condition {
                    diag.check(c >= 1.0 && c <= 100.0, || format!("C = {c} must lie in [1, 100]"));
                }
            }
        }
    }
}
