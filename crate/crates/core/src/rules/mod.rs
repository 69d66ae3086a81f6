//! Static WCAG rule engine.
//!
//! [`audit`] runs a rule catalog over a parsed document and aggregates
//! affected nodes by severity. A node that fails several rules is counted once
//! per rule.

pub mod checks;
mod names;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dom::{count_elements, DomDocument, NodeId};
use crate::style::ClassStyleMap;

pub use report::{ReportError, ReportFile, ViolationEntry, REPORT_SCHEMA, SNIPPET_MAX_CHARS};

/// Impact level of a violation. Ordered `Minor < Moderate < Serious < Critical`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Minor,
    Moderate,
    Serious,
    Critical,
}

impl Severity {
    pub const ALL: [Severity; 4] = [
        Severity::Minor,
        Severity::Moderate,
        Severity::Serious,
        Severity::Critical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Minor => "minor",
            Severity::Moderate => "moderate",
            Severity::Serious => "serious",
            Severity::Critical => "critical",
        }
    }

    /// Position in [`Severity::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Severity::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown severity {s:?}"))
    }
}

/// Affected-node totals per severity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeverityCounts {
    pub minor: u64,
    pub moderate: u64,
    pub serious: u64,
    pub critical: u64,
}

impl SeverityCounts {
    pub fn new(minor: u64, moderate: u64, serious: u64, critical: u64) -> Self {
        Self {
            minor,
            moderate,
            serious,
            critical,
        }
    }

    pub fn get(&self, v: Severity) -> u64 {
        match v {
            Severity::Minor => self.minor,
            Severity::Moderate => self.moderate,
            Severity::Serious => self.serious,
            Severity::Critical => self.critical,
        }
    }

    pub fn get_mut(&mut self, v: Severity) -> &mut u64 {
        match v {
            Severity::Minor => &mut self.minor,
            Severity::Moderate => &mut self.moderate,
            Severity::Serious => &mut self.serious,
            Severity::Critical => &mut self.critical,
        }
    }

    pub fn total(&self) -> u64 {
        Severity::ALL.iter().map(|&v| self.get(v)).sum()
    }

    /// Severity levels with at least one affected node.
    pub fn present(&self) -> Vec<Severity> {
        Severity::ALL.into_iter().filter(|&v| self.get(v) > 0).collect()
    }
}

/// Read-only inputs every check sees.
#[derive(Debug, Clone, Copy)]
pub struct AuditContext<'a> {
    pub doc: &'a DomDocument,
    pub class_map: &'a ClassStyleMap,
}

pub type CheckFn = fn(&AuditContext<'_>) -> Vec<NodeId>;

#[derive(Clone)]
pub struct Rule {
    pub id: &'static str,
    pub severity: Severity,
    pub description: &'static str,
    check: CheckFn,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule")
            .field("id", &self.id)
            .field("severity", &self.severity)
            .finish()
    }
}

impl Rule {
    pub const fn new(id: &'static str, severity: Severity, description: &'static str, check: CheckFn) -> Self {
        Self {
            id,
            severity,
            description,
            check,
        }
    }

    /// Offending nodes in document order, without duplicates.
    pub fn check(&self, ctx: &AuditContext<'_>) -> Vec<NodeId> {
        let mut nodes = (self.check)(ctx);
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule_id: &'static str,
    pub severity: Severity,
    /// Never empty.
    pub nodes: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
    pub counts: SeverityCounts,
    pub total_elements: u64,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violation(&self, rule_id: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.rule_id == rule_id)
    }

    /// Affected-node count per rule id, zero entries omitted.
    pub fn per_rule(&self) -> BTreeMap<String, u64> {
        self.violations
            .iter()
            .map(|v| (v.rule_id.to_string(), v.nodes.len() as u64))
            .collect()
    }

    /// Serializable form with source snippets taken from `doc`.
    pub fn to_file(&self, doc: &DomDocument) -> ReportFile {
        ReportFile::from_report(self, doc)
    }
}

mod catalog;
pub use catalog::default_catalog;

/// Runs every rule in catalog order.
pub fn audit(doc: &DomDocument, class_map: &ClassStyleMap, catalog: &[Rule]) -> AuditReport {
    let ctx = AuditContext { doc, class_map };
    let mut counts = SeverityCounts::default();
    let violations: Vec<Violation> = catalog
        .iter()
        .filter_map(|rule| {
            let nodes = rule.check(&ctx);
            (!nodes.is_empty()).then(|| {
                *counts.get_mut(rule.severity) += nodes.len() as u64;
                Violation {
                    rule_id: rule.id,
                    severity: rule.severity,
                    nodes,
                }
            })
        })
        .collect();
    AuditReport {
        violations,
        counts,
        total_elements: count_elements(doc) as u64,
    }
}
