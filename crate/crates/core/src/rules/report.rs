//! Report file format (`"schema": 1`).

use serde::{Deserialize, Serialize};

use super::{AuditReport, Severity, SeverityCounts};
use crate::dom::DomDocument;

pub const REPORT_SCHEMA: u32 = 1;
pub const SNIPPET_MAX_CHARS: usize = 120;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("report is not valid JSON for schema {REPORT_SCHEMA}: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported report schema {0}, expected {REPORT_SCHEMA}")]
    Schema(u32),
    #[error("report counts disagree with its violation list")]
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationEntry {
    pub rule: String,
    pub severity: Severity,
    pub nodes: Vec<usize>,
    pub snippets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub schema: u32,
    pub violations: Vec<ViolationEntry>,
    pub counts: SeverityCounts,
    pub total_elements: u64,
}

impl ReportFile {
    pub fn from_report(report: &AuditReport, doc: &DomDocument) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            violations: report
                .violations
                .iter()
                .map(|v| ViolationEntry {
                    rule: v.rule_id.to_string(),
                    severity: v.severity,
                    nodes: v.nodes.iter().map(|n| n.index()).collect(),
                    snippets: v.nodes.iter().map(|&n| doc.snippet(n, SNIPPET_MAX_CHARS)).collect(),
                })
                .collect(),
            counts: report.counts,
            total_elements: report.total_elements,
        }
    }

    /// Parses and validates the schema version and the count invariant.
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let file: ReportFile = serde_json::from_str(text)?;
        if file.schema != REPORT_SCHEMA {
            return Err(ReportError::Schema(file.schema));
        }
        let mut recount = SeverityCounts::default();
        for v in &file.violations {
            *recount.get_mut(v.severity) += v.nodes.len() as u64;
        }
        if recount != file.counts {
            return Err(ReportError::Inconsistent);
        }
        Ok(file)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_html;
    use crate::rules::{audit, default_catalog};
    use crate::style::ClassStyleMap;

    #[test]
    fn field_order_is_stable() {
        let doc = parse_html(r#"<html><body><img src="x.png"></body></html>"#).unwrap();
        let report = audit(&doc, &ClassStyleMap::builtin(), &default_catalog());
        let json = serde_json::to_string(&report.to_file(&doc)).unwrap();
        assert!(json.starts_with(r#"{"schema":1,"violations":[{"rule":"image-alt","severity":"critical","nodes":[3],"snippets":["<img src=\"x.png\">"]}"#), "{json}");
        assert!(
            json.ends_with(r#""counts":{"minor":0,"moderate":3,"serious":2,"critical":1},"total_elements":3}"#),
            "{json}"
        );
        let back = ReportFile::from_json(&json).unwrap();
        assert_eq!(back, report.to_file(&doc));
    }

    #[test]
    fn rejects_bad_reports() {
        let wrong_schema = r#"{"schema":2,"violations":[],"counts":{"minor":0,"moderate":0,"serious":0,"critical":0},"total_elements":1}"#;
        assert!(matches!(
            ReportFile::from_json(wrong_schema),
            Err(ReportError::Schema(2))
        ));
        let bad_counts = r#"{"schema":1,"violations":[],"counts":{"minor":1,"moderate":0,"serious":0,"critical":0},"total_elements":1}"#;
        assert!(matches!(
            ReportFile::from_json(bad_counts),
            Err(ReportError::Inconsistent)
        ));
        assert!(matches!(
            ReportFile::from_json(r#"{"schema":1}"#),
            Err(ReportError::Json(_))
        ));
    }
}
