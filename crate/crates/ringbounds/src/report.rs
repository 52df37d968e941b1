//! Self-describing run reports: a stable JSON schema
//! {command, version, seed, config, constants, values, tags, tables,
//! verdict, diagnostics} plus a CSV mirror of the tables.
//!
//! JSON output never contains NaN or infinity literals; non-finite
//! numbers are emitted as the strings "inf", "-inf", "nan". Every
//! emitted number carries a formula tag in `tags` (or on its table) so
//! reports can be audited line by line. Reports are bit-reproducible:
//! same config and seed, same bytes.

use crate::error::{Error, Result};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

/// f64 wrapper whose JSON form is a plain number when finite and one of
/// the strings "inf" / "-inf" / "nan" otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else if self.0.is_nan() {
            serializer.serialize_str("nan")
        } else if self.0 > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v)
    }
}

/// The dimensional constants block; bound constants appear only when the
/// command computed them.
#[derive(Debug, Clone, Serialize, Default)]
pub struct Constants {
    pub omega: Option<Num>,
    #[serde(rename = "Omega")]
    pub big_omega: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<Num>,
}

/// One table row: probe radius, bound value, measured value, slack.
#[derive(Debug, Clone, Copy)]
pub struct Row {
    pub r: f64,
    pub bound: f64,
    pub measured: f64,
    pub slack: f64,
}

impl Serialize for Row {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Row", 4)?;
        s.serialize_field("r", &Num(self.r))?;
        s.serialize_field("bound", &Num(self.bound))?;
        s.serialize_field("measured", &Num(self.measured))?;
        s.serialize_field("slack", &Num(self.slack))?;
        s.end()
    }
}

/// A named, tagged table of rows.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub tag: String,
    #[serde(serialize_with = "serialize_rows")]
    pub rows: Vec<Row>,
}

fn serialize_rows<S: Serializer>(
    rows: &[Row],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(rows.len()))?;
    for row in rows {
        seq.serialize_element(row)?;
    }
    seq.end()
}

impl Table {
    pub fn new(name: impl Into<String>, tag: impl Into<String>) -> Self {
        Table {
            name: name.into(),
            tag: tag.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, r: f64, bound: f64, measured: f64) {
        self.rows.push(Row {
            r,
            bound,
            measured,
            slack: bound - measured,
        });
    }
}

/// Verdict of a run: `Pass`/`Fail` for verification commands, `Ok` for
/// plain computations, or a free-form classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Ok,
    Label(String),
}

impl Verdict {
    pub fn as_str(&self) -> &str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Ok => "ok",
            Verdict::Label(s) => s,
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// The complete run report.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: BTreeMap<String, serde_json::Value>,
    pub constants: Constants,
    pub values: BTreeMap<String, Num>,
    pub tags: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: BTreeMap::new(),
            constants: Constants::default(),
            values: BTreeMap::new(),
            tags: BTreeMap::new(),
            tables: Vec::new(),
            verdict: Verdict::Ok,
            diagnostics: Vec::new(),
        }
    }

    pub fn set_dim_constants(&mut self, omega: f64, big_omega: f64) {
        self.constants.omega = Some(Num(omega));
        self.constants.big_omega = Some(Num(big_omega));
    }

    /// Records a named output value and the tag of the formula that
    /// produced it.
    pub fn value(&mut self, name: &str, value: f64, tag: &str) {
        self.values.insert(name.to_string(), Num(value));
        self.tags.insert(name.to_string(), tag.to_string());
    }

    pub fn config_num(&mut self, key: &str, value: f64) {
        let number = serde_json::Number::from_f64(value)
            .unwrap_or_else(|| serde_json::Number::from(0));
        self.config
            .insert(key.to_string(), serde_json::Value::Number(number));
    }

    pub fn config_str(&mut self, key: &str, value: &str) {
        self.config.insert(
            key.to_string(),
            serde_json::Value::String(value.to_string()),
        );
    }

    pub fn diagnostic(&mut self, message: impl Into<String>) {
        self.diagnostics.push(message.into());
    }

    /// True when any diagnostic records a non-convergence.
    pub fn has_nonconvergence(&self) -> bool {
        self.diagnostics.iter().any(|d| d.contains("not converge"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// CSV mirror of `tables`: one line per row, table name in the first
    /// column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("table,r,bound,measured,slack\n");
        for table in &self.tables {
            for row in &table.rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    table.name, row.r, row.bound, row.measured, row.slack
                ));
            }
        }
        out
    }

    pub fn write_files(&self, out: Option<&std::path::Path>, csv: Option<&std::path::Path>) -> Result<()> {
        if let Some(path) = out {
            std::fs::write(path, self.to_json()).map_err(|e| Error::Config {
                location: path.display().to_string(),
                message: format!("cannot write report: {e}"),
            })?;
        }
        if let Some(path) = csv {
            std::fs::write(path, self.to_csv()).map_err(|e| Error::Config {
                location: path.display().to_string(),
                message: format!("cannot write csv: {e}"),
            })?;
        }
        Ok(())
    }

    /// Exit code for the CLI: 0 on pass/ok, 2 on fail, 3 when a
    /// diagnostic records non-convergence.
    pub fn exit_code(&self) -> i32 {
        if self.has_nonconvergence() {
            return 3;
        }
        match self.verdict {
            Verdict::Fail => 2,
            _ => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_numbers_become_strings() {
        let mut report = Report::new("test", 1);
        report.value("finite", 1.5, "def:x");
        report.value("plus", f64::INFINITY, "def:x");
        report.value("minus", f64::NEG_INFINITY, "def:x");
        report.value("nan", f64::NAN, "def:x");
        let json = report.to_json();
        assert!(json.contains("\"plus\": \"inf\""));
        assert!(json.contains("\"minus\": \"-inf\""));
        assert!(json.contains("\"nan\": \"nan\""));
        assert!(!json.contains("Infinity"));
        assert!(!json.contains("NaN"));
        // still valid JSON
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["values"]["finite"], serde_json::json!(1.5));
    }

    #[test]
    fn csv_mirrors_tables() {
        let mut report = Report::new("test", 1);
        let mut table = Table::new("scan", "eq:x");
        table.push(0.5, 2.0, 1.5);
        report.tables.push(table);
        let csv = report.to_csv();
        assert_eq!(csv, "table,r,bound,measured,slack\nscan,0.5,2,1.5,0.5\n");
    }

    #[test]
    fn exit_codes_follow_verdict_and_convergence() {
        let mut report = Report::new("test", 1);
        assert_eq!(report.exit_code(), 0);
        report.verdict = Verdict::Fail;
        assert_eq!(report.exit_code(), 2);
        report.verdict = Verdict::Pass;
        report.diagnostic("discrete oracle did not converge");
        assert_eq!(report.exit_code(), 3);
    }

    #[test]
    fn serialization_is_reproducible() {
        let build = || {
            let mut report = Report::new("test", 9);
            report.set_dim_constants(4.0 * std::f64::consts::PI, 4.18879);
            report.value("x", 0.1 + 0.2, "def:x");
            report.config_num("n", 3.0);
            report.to_json()
        };
        assert_eq!(build(), build());
    }
}
