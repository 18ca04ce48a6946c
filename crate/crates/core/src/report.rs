//! Audit reports.
//!
//! Every audit returns a [`Report`]: a count of checks evaluated and the
//! list of violations found. An empty violation list means the audit
//! passed. Findings sort by (check, subject), so merging per-entity
//! results computed in parallel yields the same report as a sequential
//! run.

use std::fmt;

/// One violated check.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    /// Short identifier of the audit family, e.g. `corner_reciprocity`.
    pub check: String,
    /// Entity path the finding is about, e.g. `level 3 / point P(E1,E2,E3)`.
    pub subject: String,
    /// What failed, with the exact values involved.
    pub detail: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.check, self.subject, self.detail)
    }
}

/// Aggregated result of one or more audits.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub checks_run: usize,
    pub findings: Vec<Finding>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }

    /// Records one evaluated check that held.
    pub fn check_ok(&mut self) {
        self.checks_run += 1;
    }

    /// Records one evaluated check that failed.
    pub fn fail(&mut self, check: &str, subject: impl Into<String>, detail: impl Into<String>) {
        self.checks_run += 1;
        self.findings.push(Finding {
            check: check.to_string(),
            subject: subject.into(),
            detail: detail.into(),
        });
    }

    /// Folds another report in and restores the canonical order.
    pub fn merge(&mut self, other: Report) {
        self.checks_run += other.checks_run;
        self.findings.extend(other.findings);
        self.findings.sort();
    }

    pub fn sorted(mut self) -> Report {
        self.findings.sort();
        self
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "ok: {} checks passed", self.checks_run)
        } else {
            writeln!(
                f,
                "FAIL: {} of {} checks failed",
                self.findings.len(),
                self.checks_run
            )?;
            for finding in &self.findings {
                writeln!(f, "  {finding}")?;
            }
            Ok(())
        }
    }
}
