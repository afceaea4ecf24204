//! Experiment records and their CSV / JSON rendering.
//!
//! Floats are written in scientific notation with 17 significant digits so
//! that reruns compare byte for byte.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::stats::Estimate;

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    /// Parameter columns in output order.
    pub params: Vec<(String, String)>,
    pub statistic: String,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// An append-only table of records sharing one set of parameter columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordSet {
    experiment: String,
    columns: Vec<String>,
    records: Vec<ExperimentRecord>,
}

impl RecordSet {
    pub fn new(experiment: &str, columns: &[&str]) -> RecordSet {
        RecordSet {
            experiment: experiment.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[ExperimentRecord] {
        &self.records
    }

    /// Appends a row; `params` must follow the declared columns.
    pub fn push(&mut self, params: &[String], statistic: &str, est: Estimate) -> Result<()> {
        if params.len() != self.columns.len() {
            return Err(Error::Config(format!(
                "{} parameters given for {} columns",
                params.len(),
                self.columns.len()
            )));
        }
        if est.stderr < 0.0 {
            return Err(Error::InvalidParameter("negative standard error".into()));
        }
        self.records.push(ExperimentRecord {
            experiment: self.experiment.clone(),
            params: self.columns.iter().cloned().zip(params.iter().cloned()).collect(),
            statistic: statistic.to_string(),
            value: est.value,
            stderr: est.stderr,
            n_samples: est.n,
        });
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push_str(",statistic,value,stderr,n_samples\n");
        for r in &self.records {
            out.push_str(&r.experiment);
            for (_, v) in &r.params {
                out.push(',');
                out.push_str(v);
            }
            let _ = writeln!(
                out,
                ",{},{},{},{}",
                r.statistic,
                fmt_float(r.value),
                fmt_float(r.stderr),
                r.n_samples
            );
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.records
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    m.insert("experiment".into(), json!(r.experiment));
                    for (k, v) in &r.params {
                        m.insert(k.clone(), json!(v));
                    }
                    m.insert("statistic".into(), json!(r.statistic));
                    m.insert("value".into(), json_float(r.value));
                    m.insert("stderr".into(), json_float(r.stderr));
                    m.insert("n_samples".into(), json!(r.n_samples));
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// JSON number, or null for non-finite values.
pub fn json_float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// A pass/fail assertion attached to an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Check {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub records: RecordSet,
    pub summary: Value,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Summary, checks and rows in one JSON document.
    pub fn to_json(&self) -> String {
        let doc = json!({
            "summary": self.summary,
            "checks": self.checks,
            "records": self.records.to_json(),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }
}
