//! Check records and the staged verification report.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub residual: f64,
    pub pass: bool,
}

impl Check {
    /// Passes iff the residual is finite and at most `tol`.
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, residual: f64, tol: f64) -> Self {
        Check { name: name.into(), anchor: anchor.into(), residual, pass: residual.is_finite() && residual <= tol }
    }

    /// A yes/no condition, residual 0 or 1.
    pub fn flag(name: impl Into<String>, anchor: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), anchor: anchor.into(), residual: if ok { 0.0 } else { 1.0 }, pass: ok }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StageReport {
    pub stage: String,
    pub checks: Vec<Check>,
    /// Reported residuals that do not enter the verdict.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl StageReport {
    pub fn new(stage: impl Into<String>) -> Self {
        StageReport { stage: stage.into(), checks: Vec::new(), diagnostics: Vec::new(), error: None }
    }

    pub fn failed(stage: impl Into<String>, err: impl fmt::Display) -> Self {
        StageReport { stage: stage.into(), checks: Vec::new(), diagnostics: Vec::new(), error: Some(err.to_string()) }
    }

    pub fn pass(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub verdict: String,
    pub stages: Vec<StageReport>,
}

impl Report {
    pub fn from_stages(stages: Vec<StageReport>) -> Self {
        let ok = stages.iter().all(StageReport::pass);
        Report { verdict: if ok { "PASS".into() } else { "FAIL".into() }, stages }
    }

    pub fn pass(&self) -> bool {
        self.verdict == "PASS"
    }

    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.stages.iter().flat_map(|s| s.checks.iter())
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for st in &self.stages {
            writeln!(f, "[{}]", st.stage)?;
            if let Some(e) = &st.error {
                writeln!(f, "  ERROR {e}")?;
            }
            for c in &st.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                writeln!(f, "  {tag} {:<40} {:>10.3e}  ({})", c.name, c.residual, c.anchor)?;
            }
            for c in &st.diagnostics {
                let tag = if c.pass { "info" } else { "note" };
                writeln!(f, "  {tag} {:<40} {:>10.3e}  ({})", c.name, c.residual, c.anchor)?;
            }
        }
        write!(f, "verdict: {}", self.verdict)
    }
}
