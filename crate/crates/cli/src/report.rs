use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured - expected| <= tolerance`
    Absolute,
    /// `|measured / expected - 1| <= tolerance`
    Relative,
    /// `measured <= tolerance`
    AtMost,
    /// `measured >= tolerance`
    AtLeast,
}

/// One measured quantity against its threshold. Non-finite measurements are
/// stored as `None` and fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub comparison: Comparison,
    pub measured: Option<f64>,
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn build(
        name: &str,
        comparison: Comparison,
        measured: f64,
        expected: Option<f64>,
        tolerance: f64,
    ) -> Self {
        let passed = measured.is_finite()
            && match (comparison, expected) {
                (Comparison::Absolute, Some(e)) => (measured - e).abs() <= tolerance,
                (Comparison::Relative, Some(e)) => (measured / e - 1.0).abs() <= tolerance,
                (Comparison::AtMost, _) => measured <= tolerance,
                (Comparison::AtLeast, _) => measured >= tolerance,
                _ => false,
            };
        Self {
            name: name.to_string(),
            comparison,
            measured: measured.is_finite().then_some(measured),
            expected,
            tolerance,
            passed,
        }
    }

    pub fn absolute(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self::build(
            name,
            Comparison::Absolute,
            measured,
            Some(expected),
            tolerance,
        )
    }

    pub fn relative(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self::build(
            name,
            Comparison::Relative,
            measured,
            Some(expected),
            tolerance,
        )
    }

    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Self::build(name, Comparison::AtMost, measured, None, bound)
    }

    pub fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Self::build(name, Comparison::AtLeast, measured, None, bound)
    }

    /// A quantity that could not be computed.
    pub fn failed(
        name: &str,
        comparison: Comparison,
        expected: Option<f64>,
        tolerance: f64,
    ) -> Self {
        Self::build(name, comparison, f64::NAN, expected, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Named scalar results; non-finite values are dropped.
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.to_string(),
            passed: true,
            checks: Vec::new(),
            summary: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn record(&mut self, key: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.summary.insert(key.into(), value);
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Appends `other` with its check names and summary keys prefixed.
    pub fn merge(&mut self, prefix: &str, other: RunReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.check(c);
        }
        for (k, v) in other.summary {
            self.summary.insert(format!("{prefix}.{k}"), v);
        }
        self.notes.extend(other.notes);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let measured = c.measured.map_or("n/a".to_string(), |m| format!("{m:.6e}"));
                let target = match (c.comparison, c.expected) {
                    (Comparison::Absolute, Some(e)) => format!("{e} +/- {:e}", c.tolerance),
                    (Comparison::Relative, Some(e)) => {
                        format!("{e} within {:e} relative", c.tolerance)
                    }
                    (Comparison::AtMost, _) => format!("<= {:e}", c.tolerance),
                    (Comparison::AtLeast, _) => format!(">= {:e}", c.tolerance),
                    _ => String::new(),
                };
                format!(
                    "{} {}: {} (want {})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    measured,
                    target
                )
            })
            .collect()
    }
}
