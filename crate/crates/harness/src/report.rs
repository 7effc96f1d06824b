//! Experiment reports and their JSON, CSV and markdown renderings.
//!
//! JSON carries everything except wall time, so equal (config, seed,
//! version) triples give byte-identical files.
//!
//! CSV columns: `stage, n, gamma, m, t, test_function`, then one column per
//! metric name (sorted, union over rows). Missing keys are empty cells.
//! For hydro rows `n` is the scaling parameter; for PDE rows it is the grid
//! size; rate-audit rows put the ring size there.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Md => "md",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub stage: String,
    pub n: Option<usize>,
    pub gamma: Option<f64>,
    pub m: Option<u32>,
    pub t: Option<f64>,
    pub test_function: Option<String>,
    pub metrics: BTreeMap<String, f64>,
}

impl Row {
    pub fn new(stage: &str) -> Self {
        Row {
            stage: stage.to_string(),
            n: None,
            gamma: None,
            m: None,
            t: None,
            test_function: None,
            metrics: BTreeMap::new(),
        }
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn m(mut self, m: u32) -> Self {
        self.m = Some(m);
        self
    }

    pub fn t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn test_function(mut self, label: &str) -> Self {
        self.test_function = Some(label.to_string());
        self
    }

    /// Non-finite values are dropped; JSON has no representation for them.
    pub fn metric(mut self, name: &str, value: f64) -> Self {
        if value.is_finite() {
            self.metrics.insert(name.to_string(), value);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Comparison {
    Below { limit: f64 },
    Above { limit: f64 },
    Near { target: f64, tolerance: f64 },
}

impl Comparison {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Comparison::Below { limit } => v < limit,
            Comparison::Above { limit } => v > limit,
            Comparison::Near { target, tolerance } => (v - target).abs() <= tolerance,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Comparison::Below { limit } => format!("< {limit:e}"),
            Comparison::Above { limit } => format!("> {limit:e}"),
            Comparison::Near { target, tolerance } => format!("{target} ± {tolerance}"),
        }
    }
}

/// A pass/fail flag together with the number it was decided on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub detail: String,
    /// `None` when the measured value was not finite; such checks fail.
    pub value: Option<f64>,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, detail: impl Into<String>, value: f64, comparison: Comparison) -> Self {
        let finite = value.is_finite();
        Check {
            name: name.to_string(),
            detail: detail.into(),
            value: finite.then_some(value),
            comparison,
            passed: finite && comparison.holds(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub name: String,
    pub gamma: Option<f64>,
    pub m: Option<u32>,
    pub t: Option<f64>,
    pub test_function: Option<String>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: Option<f64>,
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub master_seed: u64,
    pub version: String,
}

/// Elapsed seconds of a run. Not serialized and ignored by equality, so
/// timing never leaks into reproducibility comparisons.
#[derive(Debug, Clone, Copy, Default)]
pub struct WallTime(pub Option<f64>);

impl PartialEq for WallTime {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub mode: Mode,
    pub meta: Metadata,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub fits: Vec<SlopeFit>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub wall_time: WallTime,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            mode: config.mode,
            meta: Metadata {
                master_seed: config.master_seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            config: config.clone(),
            rows: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            wall_time: WallTime::default(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| HarnessError::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Serialization(e.to_string()))
    }

    pub fn metric_columns(&self) -> Vec<String> {
        let names: BTreeSet<&String> = self.rows.iter().flat_map(|r| r.metrics.keys()).collect();
        names.into_iter().cloned().collect()
    }

    pub fn to_csv(&self) -> String {
        let metrics = self.metric_columns();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["stage", "n", "gamma", "m", "t", "test_function"].map(String::from).to_vec();
        header.extend(metrics.iter().cloned());
        let opt = |v: Option<String>| v.unwrap_or_default();
        // writing into a Vec cannot fail
        w.write_record(&header).expect("in-memory CSV");
        for r in &self.rows {
            let mut cells = vec![
                r.stage.clone(),
                opt(r.n.map(|v| v.to_string())),
                opt(r.gamma.map(|v| v.to_string())),
                opt(r.m.map(|v| v.to_string())),
                opt(r.t.map(|v| v.to_string())),
                opt(r.test_function.clone()),
            ];
            cells.extend(metrics.iter().map(|k| opt(r.metrics.get(k).map(|v| v.to_string()))));
            w.write_record(&cells).expect("in-memory CSV");
        }
        String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV of UTF-8 fields")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {} report\n", self.mode.name());
        let _ = writeln!(s, "- schema version: {}", self.schema_version);
        let _ = writeln!(s, "- crate version: {}", self.meta.version);
        let _ = writeln!(s, "- master seed: {}", self.meta.master_seed);
        if let Some(w) = self.wall_time.0 {
            let _ = writeln!(s, "- wall time: {w:.1} s");
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(s, "- checks passed: {passed}/{}\n", self.checks.len());

        if !self.checks.is_empty() {
            s.push_str("## Checks\n\n| check | detail | value | required | result |\n|---|---|---|---|---|\n");
            for c in &self.checks {
                let value = c.value.map_or("n/a".to_string(), |v| format!("{v:.4e}"));
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "| {} | {} | {value} | {} | {verdict} |", c.name, c.detail, c.comparison.describe());
            }
            s.push('\n');
        }
        if !self.fits.is_empty() {
            s.push_str("## Log-log fits\n\n| fit | gamma | m | t | test function | slope | predicted |\n|---|---|---|---|---|---|---|\n");
            for f in &self.fits {
                let num = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.3}"));
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    f.name,
                    num(f.gamma),
                    f.m.map_or(String::new(), |m| m.to_string()),
                    num(f.t),
                    f.test_function.as_deref().unwrap_or(""),
                    num(f.slope),
                    num(f.predicted)
                );
            }
            s.push('\n');
        }
        if !self.rows.is_empty() {
            let metrics = self.metric_columns();
            s.push_str("## Data\n\n| stage | n | gamma | m | t | test function |");
            for k in &metrics {
                let _ = write!(s, " {k} |");
            }
            s.push_str("\n|---|---|---|---|---|---|");
            s.push_str(&"---|".repeat(metrics.len()));
            s.push('\n');
            for r in &self.rows {
                let _ = write!(
                    s,
                    "| {} | {} | {} | {} | {} | {} |",
                    r.stage,
                    r.n.map_or(String::new(), |v| v.to_string()),
                    r.gamma.map_or(String::new(), |v| v.to_string()),
                    r.m.map_or(String::new(), |v| v.to_string()),
                    r.t.map_or(String::new(), |v| v.to_string()),
                    r.test_function.as_deref().unwrap_or("")
                );
                for k in &metrics {
                    let _ = write!(s, " {} |", r.metrics.get(k).map_or(String::new(), |v| format!("{v:.4e}")));
                }
                s.push('\n');
            }
            s.push('\n');
        }
        if !self.notes.is_empty() {
            s.push_str("## Notes\n\n");
            for n in &self.notes {
                let _ = writeln!(s, "- {n}");
            }
        }
        s
    }
}

/// Writes `<dir>/<mode>.<ext>` and returns its path.
pub fn emit_report(report: &ExperimentReport, format: Format, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let path = dir.join(format!("{}.{}", report.mode.name(), format.extension()));
    let body = match format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
        Format::Md => report.to_markdown(),
    };
    std::fs::write(&path, body).map_err(HarnessError::io(&path))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new(&ExperimentConfig::default());
        r.rows.push(Row::new("hydro").n(256).gamma(1.0).m(2).t(0.5).test_function("gauss(c=1,w=0.2)").metric("e", 0.1));
        r.rows.push(Row::new("hydro").n(512).metric("e", 0.05).metric("x", f64::NAN));
        r.checks.push(Check::new("a", "ratio", 0.5, Comparison::Below { limit: 1.0 }));
        r.checks.push(Check::new("b", "nan", f64::NAN, Comparison::Below { limit: 1.0 }));
        r.wall_time = WallTime(Some(3.0));
        r
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(ExperimentReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn json_has_no_wall_time() {
        assert!(!sample().to_json().unwrap().contains("wall"));
    }

    #[test]
    fn non_finite_values_fail_and_are_dropped() {
        let r = sample();
        assert!(!r.rows[1].metrics.contains_key("x"));
        assert!(r.checks[0].passed);
        assert!(!r.checks[1].passed && r.checks[1].value.is_none());
        assert!(!r.all_passed());
    }

    #[test]
    fn csv_quotes_labels_and_leaves_gaps() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "stage,n,gamma,m,t,test_function,e");
        assert_eq!(lines[1], "hydro,256,1,2,0.5,\"gauss(c=1,w=0.2)\",0.1");
        assert_eq!(lines[2], "hydro,512,,,,,0.05");
    }

    #[test]
    fn empty_report_is_valid() {
        let r = ExperimentReport::new(&ExperimentConfig::default());
        assert_eq!(r.to_csv().lines().count(), 1);
        assert!(r.all_passed());
        assert_eq!(ExperimentReport::from_json(&r.to_json().unwrap()).unwrap(), r);
        assert!(r.to_markdown().contains("checks passed: 0/0"));
    }

    #[test]
    fn comparisons() {
        assert!(Comparison::Near { target: -1.0, tolerance: 0.3 }.holds(-0.8));
        assert!(!Comparison::Near { target: -1.0, tolerance: 0.3 }.holds(-0.6));
        assert!(Comparison::Above { limit: 3.0 }.holds(3.5));
        assert!(!Comparison::Below { limit: 3.0 }.holds(3.0));
    }
}
