//! Versioned JSON reports made of named check records.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{HdxError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    ReportOnly,
    /// The checked bound carries no information at these parameters.
    Vacuous,
}

impl CheckStatus {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The statement the check is about.
    pub anchor: String,
    pub status: CheckStatus,
    pub values: Value,
}

impl CheckRecord {
    pub fn new(name: &str, anchor: &str, status: CheckStatus, values: Value) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            status,
            values,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    /// Wall-clock seconds; excluded from reproducibility comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<f64>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            checks: Vec::new(),
            timing: None,
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
    }

    pub fn check(&mut self, name: &str, anchor: &str, status: CheckStatus, values: Value) {
        self.push(CheckRecord::new(name, anchor, status, values));
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(s)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(HdxError::Validation(format!(
                "report schema {} is not {SCHEMA_VERSION}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// Concatenates the checks of several reports, prefixing each check
    /// name with its command.
    pub fn merge(reports: &[Report]) -> Report {
        let mut out = Report::new(
            "report",
            Value::Array(reports.iter().map(|r| Value::String(r.command.clone())).collect()),
        );
        for r in reports {
            for c in &r.checks {
                let mut c = c.clone();
                c.name = format!("{}/{}", r.command, c.name);
                out.push(c);
            }
        }
        out.timing = reports.iter().map(|r| r.timing).sum();
        out
    }
}
