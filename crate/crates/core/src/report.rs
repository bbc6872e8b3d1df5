//! Per-rule verdicts gathered into one compliance report, rendered as
//! canonical JSON or plain text.
//!
//! Structured form:
//!
//! ```json
//! {
//!   "source": {"schematic": "case.dxf", "config_fingerprint": "<sha256 hex>"},
//!   "entries": [{
//!     "rule_id": "MP", "rule": "...", "category": "Grounding",
//!     "status": "fail", "violation": true,
//!     "function_id": "check_grounding_uniqueness", "region": "CT_secondary",
//!     "evidence": [{"nodes": [4, 5], "message": "..."}],
//!     "planner_diagnostics": [], "error": null
//!   }],
//!   "summary": {"total": {...}, "by_category": {"Labeling": {...}, ...}}
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checks::{CheckError, CheckOutcome, Evidence};
use crate::planner::{Category, PlanError, Rule, StructuredQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Indeterminate => "INDETERMINATE",
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EvaluationError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// Everything known about one rule after planning and checking.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleEvaluation {
    pub rule: Rule,
    pub query: Option<StructuredQuery>,
    pub outcome: Result<CheckOutcome, EvaluationError>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub rule_id: String,
    pub rule: String,
    pub category: Category,
    pub status: Status,
    /// True exactly when `status` is `fail`.
    pub violation: bool,
    pub function_id: Option<String>,
    pub region: Option<String>,
    pub evidence: Vec<Evidence>,
    pub planner_diagnostics: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
}

impl StatusCounts {
    fn add(&mut self, status: Status) {
        match status {
            Status::Pass => self.pass += 1,
            Status::Fail => self.fail += 1,
            Status::Indeterminate => self.indeterminate += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: StatusCounts,
    pub by_category: BTreeMap<Category, StatusCounts>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub schematic: String,
    pub config_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub source: Source,
    pub entries: Vec<ReportEntry>,
    pub summary: Summary,
}

/// Hex SHA-256 of arbitrary bytes, used to fingerprint run configuration.
pub fn fingerprint(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn entry(eval: RuleEvaluation) -> ReportEntry {
    let (status, evidence, function_id, error) = match eval.outcome {
        Ok(outcome) => (
            if outcome.pass { Status::Pass } else { Status::Fail },
            outcome.evidence,
            Some(outcome.function_id),
            None,
        ),
        Err(e) => (
            Status::Indeterminate,
            Vec::new(),
            eval.query.as_ref().map(|q| q.function.clone()),
            Some(e.to_string()),
        ),
    };
    ReportEntry {
        rule_id: eval.rule.id,
        rule: eval.rule.text,
        category: eval.rule.category,
        status,
        violation: status == Status::Fail,
        function_id,
        region: eval.query.map(|q| q.region),
        evidence,
        planner_diagnostics: eval.diagnostics,
        error,
    }
}

/// One entry per evaluation, in input order. Planner and selection
/// failures become `indeterminate`, never `pass`.
pub fn aggregate(evaluations: Vec<RuleEvaluation>, source: Source) -> ComplianceReport {
    let entries: Vec<ReportEntry> = evaluations.into_iter().map(entry).collect();
    let mut total = StatusCounts::default();
    let mut by_category: BTreeMap<Category, StatusCounts> =
        Category::ALL.iter().map(|c| (*c, StatusCounts::default())).collect();
    for e in &entries {
        total.add(e.status);
        by_category.entry(e.category).or_default().add(e.status);
    }
    ComplianceReport {
        source,
        entries,
        summary: Summary { total, by_category },
    }
}

impl ComplianceReport {
    pub fn status_of(&self, rule_id: &str) -> Option<Status> {
        self.entries.iter().find(|e| e.rule_id == rule_id).map(|e| e.status)
    }
}

/// Canonical pretty JSON with a trailing newline.
pub fn to_structured(report: &ComplianceReport) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
    out.push(b'\n');
    out
}

pub fn from_structured(bytes: &[u8]) -> Result<ComplianceReport, serde_json::Error> {
    serde_json::from_slice(bytes)
}

pub fn to_text(report: &ComplianceReport) -> String {
    let mut out = String::new();
    writeln!(out, "Compliance report for {}", report.source.schematic).unwrap();
    let width = report.entries.iter().map(|e| e.rule_id.len()).max().unwrap_or(0);
    for e in &report.entries {
        let detail = e
            .evidence
            .first()
            .map(|ev| ev.message.as_str())
            .or(e.error.as_deref())
            .unwrap_or("");
        let check = match (&e.function_id, &e.region) {
            (Some(f), Some(r)) => format!("{f}@{r}"),
            (Some(f), None) => f.clone(),
            _ => "-".to_string(),
        };
        let line = format!("{:width$}  {:13}  {check}  {detail}", e.rule_id, e.status.label());
        writeln!(out, "{}", line.trim_end()).unwrap();
    }
    let t = report.summary.total;
    writeln!(
        out,
        "Summary: {} pass, {} fail, {} indeterminate",
        t.pass, t.fail, t.indeterminate
    )
    .unwrap();
    for (cat, c) in &report.summary.by_category {
        writeln!(
            out,
            "  {:8} {} pass, {} fail, {} indeterminate",
            cat.label(),
            c.pass,
            c.fail,
            c.indeterminate
        )
        .unwrap();
    }
    out
}
