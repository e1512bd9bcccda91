//! Run records and tabular results.

use serde::{Deserialize, Serialize};

/// Per-step scalar trace of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepScalars {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub seminorm: Option<f64>,
    pub ledger_min_slack: Option<f64>,
}

/// Reproducible record of one run: config hash + seed identify it fully.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub wall_seconds: f64,
    pub steps: Vec<StepScalars>,
}

impl RunRecord {
    pub fn new(label: impl Into<String>, config_hash: &str, seed: u64) -> Self {
        RunRecord {
            label: label.into(),
            config_hash: config_hash.to_string(),
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_seconds: 0.0,
            steps: Vec::new(),
        }
    }
}

/// Generic numeric table for emission; first column is the abscissa when
/// plotted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// log-log axes when plotted as SVG
    pub loglog: bool,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        Table { name: name.into(), columns, rows: Vec::new(), loglog: false }
    }

    pub fn loglog(mut self) -> Self {
        self.loglog = true;
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Outcome of one experiment invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub kind: String,
    pub config_hash: String,
    pub passed: bool,
    pub details: Vec<String>,
    pub records: Vec<RunRecord>,
    pub tables: Vec<Table>,
}

impl ExperimentOutcome {
    pub fn new(kind: impl Into<String>, config_hash: &str) -> Self {
        ExperimentOutcome {
            kind: kind.into(),
            config_hash: config_hash.to_string(),
            passed: true,
            details: Vec::new(),
            records: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.details.push(line.into());
    }

    pub fn check(&mut self, ok: bool, line: impl Into<String>) {
        let line = line.into();
        if ok {
            self.details.push(format!("pass: {line}"));
        } else {
            self.passed = false;
            self.details.push(format!("FAIL: {line}"));
        }
    }
}
