use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one_thread() -> usize {
    1
}

/// Parameters shared by every box experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Prime cutoff.
    pub x: u64,
    #[serde(rename = "A")]
    pub a_box: u64,
    #[serde(rename = "B")]
    pub b_box: u64,
    pub r: i64,
    /// Log power in the threshold `sqrt(x) / log^c x`.
    pub c: f64,
    /// Worker threads. Never affects results, so it is not serialized.
    #[serde(skip, default = "one_thread")]
    pub threads: usize,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(x: u64, a_box: u64, b_box: u64, r: i64) -> Self {
        ExperimentConfig { x, a_box, b_box, r, c: 1.0, threads: 1, cache_dir: None }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.x < 5 {
            return Err(Error::InvalidArgument(format!("x must be at least 5, got {}", self.x)));
        }
        if self.a_box == 0 || self.b_box == 0 {
            return Err(Error::InvalidArgument("A and B must be positive".into()));
        }
        if self.x > u32::MAX as u64 || self.a_box > i32::MAX as u64 || self.b_box > i32::MAX as u64 {
            return Err(Error::Resource("x, A or B beyond the supported range".into()));
        }
        if self.c.is_nan() {
            return Err(Error::InvalidArgument("c must be a number".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidArgument("threads must be positive".into()));
        }
        Ok(())
    }

    /// Number of curves in the box, `(2A+1)(2B+1)`.
    pub fn curve_count(&self) -> u64 {
        (2 * self.a_box + 1) * (2 * self.b_box + 1)
    }

    /// The averaging weight `4AB`.
    pub fn weight(&self) -> f64 {
        4.0 * self.a_box as f64 * self.b_box as f64
    }

    /// Warnings for boxes too small for the asymptotic statements:
    /// `A, B > sqrt(x)` and `AB > x^{3/2}`.
    pub fn hypothesis_warnings(&self) -> Vec<String> {
        let x = self.x as f64;
        let root = x.sqrt();
        let mut out = Vec::new();
        if (self.a_box as f64) <= root {
            out.push(format!("A = {} does not exceed sqrt(x) = {root:.3}", self.a_box));
        }
        if (self.b_box as f64) <= root {
            out.push(format!("B = {} does not exceed sqrt(x) = {root:.3}", self.b_box));
        }
        let area = self.a_box as f64 * self.b_box as f64;
        if area <= x.powf(1.5) {
            out.push(format!("AB = {area} does not exceed x^(3/2) = {:.3}", x.powf(1.5)));
        }
        out
    }

    /// `sqrt(x) / log^c x`.
    pub fn threshold(&self) -> f64 {
        let x = self.x as f64;
        x.sqrt() / x.ln().powf(self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTerm {
    pub name: String,
    pub value: f64,
}

/// Per-prime detail of a box average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeRow {
    pub p: u64,
    /// Residue pairs mod `p` with trace `r`.
    #[serde(rename = "N_r")]
    pub n_r: u64,
    /// `H(r^2 - 4p)`.
    #[serde(rename = "H_rp")]
    pub h_rp: u64,
    /// This prime's share of the mean.
    pub contrib: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageReport {
    pub config: ExperimentConfig,
    pub mean: f64,
    pub prediction: f64,
    pub second_moment: Option<f64>,
    pub exceptional_count: Option<u64>,
    pub threshold: Option<f64>,
    pub error_budget: Vec<ErrorTerm>,
    pub timing: Option<Timing>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_prime_rows: Option<Vec<PrimeRow>>,
}

impl AverageReport {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("report check failed: {what}")));
        self.config.validate()?;
        if !(self.mean.is_finite() && self.mean >= 0.0) {
            return bad("mean must be finite and non-negative");
        }
        if !(self.prediction.is_finite() && self.prediction >= 0.0) {
            return bad("prediction must be finite and non-negative");
        }
        if let Some(m) = self.second_moment {
            if !(m.is_finite() && m >= 0.0) {
                return bad("second moment must be finite and non-negative");
            }
        }
        if let Some(n) = self.exceptional_count {
            if n > self.config.curve_count() {
                return bad("more exceptional curves than curves in the box");
            }
        }
        if let Some(t) = self.threshold {
            if t.is_nan() || t < 0.0 {
                return bad("threshold must be non-negative");
            }
        }
        if let Some(rows) = &self.per_prime_rows {
            if rows.windows(2).any(|w| w[0].p >= w[1].p) {
                return bad("per-prime rows out of order");
            }
            if rows.iter().any(|row| !(row.contrib.is_finite() && row.contrib >= 0.0)) {
                return bad("negative per-prime contribution");
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: AverageReport = serde_json::from_str(text)?;
        report.validate()?;
        Ok(report)
    }

    /// Per-prime table `p,N_r,H_rp,contrib`, if the report carries one.
    pub fn to_csv(&self) -> Option<String> {
        let rows = self.per_prime_rows.as_ref()?;
        let mut out = String::from("p,N_r,H_rp,contrib\n");
        for row in rows {
            writeln!(out, "{},{},{},{}", row.p, row.n_r, row.h_rp, row.contrib).unwrap();
        }
        Some(out)
    }
}
