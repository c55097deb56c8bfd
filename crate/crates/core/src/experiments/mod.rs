//! Scripted, seeded reproductions with pass/fail assertions, CSV tables and
//! a JSON report, plus the command-line front end.

mod cli;
mod collapse;
mod mollification;
mod nonconvexity;
pub mod random;
mod regularity;
mod truncation;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub use cli::run_cli;
pub use collapse::exp_dirac_collapse;
pub use mollification::exp_mollification_stability;
pub use nonconvexity::exp_nonconvexity;
pub use regularity::exp_regularity_suite;
pub use truncation::exp_truncation_suite;

/// Registered experiment names, in listing order.
pub const EXPERIMENTS: [&str; 5] = [
    "exp_dirac_collapse",
    "exp_nonconvexity",
    "exp_truncation_suite",
    "exp_regularity_suite",
    "exp_mollification_stability",
];

/// What to run and where to put the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(name: &str) -> Self {
        ExperimentSpec {
            name: name.to_string(),
            parameters: BTreeMap::new(),
            output_dir: PathBuf::from("results").join(name),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_output_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output_dir = dir.into();
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.parameters.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidConfig(format!(
                "{}: unknown parameter `{k}` (expected one of {})",
                self.name,
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.parameters.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::InvalidConfig(format!("parameter `{key}` must be a number"))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.parameters.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|v| v as usize)
                .ok_or_else(|| Error::InvalidConfig(format!("parameter `{key}` must be a nonnegative integer"))),
        }
    }

    /// `null` maps to `None`, a missing key to `default`.
    fn opt_f64_or(&self, key: &str, default: Option<f64>) -> Result<Option<f64>> {
        match self.parameters.get(key) {
            None => Ok(default),
            Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| Error::InvalidConfig(format!("parameter `{key}` must be a number or null"))),
        }
    }

    fn list_or<T: serde::de::DeserializeOwned>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.parameters.get(key) {
            None => Ok(default),
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| Error::InvalidConfig(format!("parameter `{key}`: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
}

/// One checked statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    /// The mathematical statement being checked.
    pub reference: String,
    pub outcome: Outcome,
    /// Tolerance used, spelled out.
    pub tolerance: String,
    /// Measured values behind the outcome.
    pub detail: String,
}

impl Assertion {
    pub fn check(name: &str, reference: &str, passed: bool, tolerance: &str, detail: String) -> Self {
        Assertion {
            name: name.to_string(),
            reference: reference.to_string(),
            outcome: if passed { Outcome::Pass } else { Outcome::Fail },
            tolerance: tolerance.to_string(),
            detail,
        }
    }

    pub fn not_applicable(name: &str, reference: &str, detail: String) -> Self {
        Assertion {
            name: name.to_string(),
            reference: reference.to_string(),
            outcome: Outcome::NotApplicable,
            tolerance: String::new(),
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Fail
    }
}

/// A CSV table held in memory until the report is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(&self.header).map_err(|e| csv_error(&path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

/// Shortest round-trip formatting, so tables are byte-stable.
pub(crate) fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub(crate) fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
    /// Paths of the CSV tables, filled in by [`ExperimentReport::write`].
    pub tables: Vec<PathBuf>,
    pub summary: Value,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(skip)]
    pub table_data: Vec<Table>,
}

impl ExperimentReport {
    fn new(spec: &ExperimentSpec) -> Self {
        ExperimentReport {
            name: spec.name.clone(),
            seed: spec.seed,
            parameters: spec.parameters.clone(),
            assertions: Vec::new(),
            tables: Vec::new(),
            summary: Value::Null,
            notes: Vec::new(),
            table_data: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(Assertion::passed)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.table_data.iter().find(|t| t.name == name)
    }

    /// Writes every table and `report.json` into `dir`.
    pub fn write(&mut self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.tables = self
            .table_data
            .iter()
            .map(|t| t.write(dir))
            .collect::<Result<_>>()?;
        let path = dir.join("report.json");
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    /// One line per assertion: `PASS|FAIL|N/A name: detail`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for a in &self.assertions {
            let tag = match a.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::NotApplicable => "N/A ",
            };
            out.push_str(&format!("{tag} {}: {} [{}]\n", a.name, a.detail, a.tolerance));
        }
        out
    }
}

/// Runs a registered experiment without writing anything.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    match spec.name.as_str() {
        "exp_dirac_collapse" => exp_dirac_collapse(spec),
        "exp_nonconvexity" => exp_nonconvexity(spec),
        "exp_truncation_suite" => exp_truncation_suite(spec),
        "exp_regularity_suite" => exp_regularity_suite(spec),
        "exp_mollification_stability" => exp_mollification_stability(spec),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}
