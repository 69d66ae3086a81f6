#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use a11y_core::rules::{audit, default_catalog, AuditReport, Rule};
use a11y_core::{parse_html, ClassStyleMap};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub fixtures: Vec<Fixture>,
}

#[derive(Debug, Deserialize)]
pub struct Fixture {
    pub rule: Option<String>,
    pub file: String,
    pub expected: BTreeMap<String, u64>,
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/rules")
}

pub fn manifest() -> Manifest {
    let text = std::fs::read_to_string(fixture_dir().join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn read_fixture(file: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(file)).unwrap()
}

pub fn audit_with(html: &str, catalog: &[Rule]) -> AuditReport {
    let doc = parse_html(html).unwrap();
    audit(&doc, &ClassStyleMap::builtin(), catalog)
}

pub fn audit_default(html: &str) -> AuditReport {
    audit_with(html, &default_catalog())
}
