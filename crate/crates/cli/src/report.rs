//! Report types shared by every scenario kind.

use serde::Serialize;

use crate::count::CountResult;
use crate::find::FindResult;
use crate::scenario::{Kind, Scenario};
use crate::sweep::SweepResult;
use crate::verify::VerifyResult;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Passes when `value <= tolerance`.
    AtMost,
    /// Passes when `value > tolerance`.
    Above,
}

/// One numeric comparison and its verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    /// `value <= tolerance`. NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            relation: Relation::AtMost,
            passed: value <= tolerance,
        }
    }

    /// `value > threshold`. NaN fails.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance: threshold,
            relation: Relation::Above,
            passed: value > threshold,
        }
    }

    pub fn describe(&self) -> String {
        let op = match (self.relation, self.passed) {
            (Relation::AtMost, true) => "<=",
            (Relation::AtMost, false) => "exceeds",
            (Relation::Above, true) => ">",
            (Relation::Above, false) => "not above",
        };
        format!(
            "{} = {:.3e} {op} {:?}",
            self.name, self.value, self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ReportBody {
    Find(Box<FindResult>),
    Count(Box<CountResult>),
    Verify(VerifyResult),
    Sweep(SweepResult),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub kind: Kind,
    pub scenario: Scenario,
    pub result: ReportBody,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Only present when timings were requested, so default reports stay
    /// bit-identical between runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

impl Report {
    pub fn new(scenario: Scenario, result: ReportBody, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Report {
            report_version: REPORT_VERSION,
            kind: scenario.kind,
            scenario,
            result,
            checks,
            passed,
            warnings: Vec::new(),
            wall_clock_s: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(!Check::above("x", f64::NAN, 0.0).passed);
        assert!(Check::at_most("x", 1.0, 1.0).passed);
        assert!(!Check::above("x", 0.5, 0.5).passed);
    }
}
