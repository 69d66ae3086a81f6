//! Page template with `{{slot}}` placeholders and the default 8-slot page.

use super::policy::{Choice, DecisionSlot};
use super::GrpoError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Slot(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageTemplate {
    source: String,
    segments: Vec<Segment>,
    slots: Vec<DecisionSlot>,
}

impl PageTemplate {
    /// Every placeholder must name a slot and every slot must appear at least once.
    /// A slot may appear several times (e.g. an element's open and close tag).
    pub fn new(source: impl Into<String>, slots: Vec<DecisionSlot>) -> Result<Self, GrpoError> {
        let source = source.into();
        let mut segments = Vec::new();
        let mut used = vec![false; slots.len()];
        let mut rest = source.as_str();
        while let Some(open) = rest.find("{{") {
            let close = rest[open..]
                .find("}}")
                .map(|c| open + c)
                .ok_or_else(|| GrpoError::Template("unterminated {{ placeholder".into()))?;
            let name = rest[open + 2..close].trim();
            let idx = slots
                .iter()
                .position(|s| s.name() == name)
                .ok_or_else(|| GrpoError::Template(format!("placeholder {{{{{name}}}}} has no slot")))?;
            used[idx] = true;
            if open > 0 {
                segments.push(Segment::Literal(rest[..open].to_string()));
            }
            segments.push(Segment::Slot(idx));
            rest = &rest[close + 2..];
        }
        if !rest.is_empty() {
            segments.push(Segment::Literal(rest.to_string()));
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(GrpoError::Template(format!(
                "slot {:?} never appears in the template",
                slots[i].name()
            )));
        }
        Ok(Self {
            source,
            segments,
            slots,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn slots(&self) -> &[DecisionSlot] {
        &self.slots
    }

    /// Caller guarantees `choices` fits the slot list; see
    /// [`TemplatePolicy::validate_choices`](super::TemplatePolicy::validate_choices).
    pub fn render(&self, choices: &[usize]) -> String {
        let mut out = String::with_capacity(self.source.len() + 256);
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => out.push_str(s),
                Segment::Slot(j) => out.push_str(&self.slots[*j].choices()[choices[*j]].fragment),
            }
        }
        out
    }
}

/// Each slot lists its most damaging choice first, so a freshly initialized
/// (uniform) policy decodes greedily to the worst page.
pub fn default_slots() -> Vec<DecisionSlot> {
    let slot = |name: &str, choices: &[(&str, &str)]| {
        DecisionSlot::new(name, choices.iter().map(|&(l, f)| Choice::new(l, f)).collect())
            .expect("default slots are well formed")
    };
    vec![
        slot("lang", &[("absent", ""), ("present", r#" lang="en""#)]),
        slot("title", &[("absent", ""), ("present", "<title>Harvest Box</title>")]),
        slot(
            "viewport",
            &[
                (
                    "user-scalable-no",
                    r#"<meta name="viewport" content="width=device-width, initial-scale=1, user-scalable=no">"#,
                ),
                (
                    "standard",
                    r#"<meta name="viewport" content="width=device-width, initial-scale=1">"#,
                ),
            ],
        ),
        slot("main", &[("absent", "div"), ("present", "main")]),
        slot(
            "heading",
            &[
                ("h2-h4", "<h2>Weekly boxes</h2>\n<h4>Seasonal picks</h4>"),
                ("h1-h2", "<h1>Weekly boxes</h1>\n<h2>Seasonal picks</h2>"),
            ],
        ),
        slot(
            "img-alt",
            &[
                ("absent", r#"<img src="crate.jpg" width="320" height="200">"#),
                ("empty", r#"<img src="crate.jpg" width="320" height="200" alt="">"#),
                (
                    "descriptive",
                    r#"<img src="crate.jpg" width="320" height="200" alt="A wooden crate of carrots, kale and apples">"#,
                ),
            ],
        ),
        slot(
            "text-color",
            &[("#aaaaaa", "#aaaaaa"), ("#777777", "#777777"), ("#111111", "#111111")],
        ),
        slot(
            "link-text",
            &[
                ("empty", r#"<a href="/plans"></a>"#),
                ("descriptive", r#"<a href="/plans">Compare delivery plans</a>"#),
            ],
        ),
    ]
}

pub const DEFAULT_TEMPLATE: &str = r#"<!DOCTYPE html>
<html{{lang}}>
<head>
<meta charset="utf-8">
{{title}}
{{viewport}}
</head>
<body>
<{{main}} class="page">
{{heading}}
<p>Fresh produce from farms within fifty miles, packed the morning it ships.</p>
<figure>
{{img-alt}}
</figure>
<p style="color: {{text-color}}; background-color: #ffffff">Orders placed before noon leave the same day.</p>
<p>{{link-text}}</p>
</{{main}}>
</body>
</html>
"#;

pub fn default_template() -> PageTemplate {
    PageTemplate::new(DEFAULT_TEMPLATE, default_slots()).expect("default template matches default slots")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_html;
    use crate::rules::{audit, default_catalog, AuditReport, Severity};
    use crate::style::ClassStyleMap;

    fn audit_choices(t: &PageTemplate, choices: &[usize]) -> AuditReport {
        let doc = parse_html(&t.render(choices)).unwrap();
        audit(&doc, &ClassStyleMap::builtin(), &default_catalog())
    }

    fn best(t: &PageTemplate) -> Vec<usize> {
        t.slots().iter().map(|s| s.len() - 1).collect()
    }

    #[test]
    fn best_vector_is_clean() {
        let t = default_template();
        let r = audit_choices(&t, &best(&t));
        assert!(r.is_clean(), "{:?}", r.violations);
    }

    #[test]
    fn worst_vector_hits_every_slot_rule() {
        let t = default_template();
        let r = audit_choices(&t, &vec![0; t.slots().len()]);
        let expected = [
            "image-alt",
            "link-name",
            "document-title",
            "html-has-lang",
            "meta-viewport",
            "color-contrast",
            "region",
            "landmark-one-main",
            "page-has-heading-one",
            "heading-order",
        ];
        let ids: Vec<_> = r.violations.iter().map(|v| v.rule_id).collect();
        assert_eq!(ids.len(), expected.len(), "{ids:?}");
        for id in expected {
            assert!(ids.contains(&id), "{id} missing from {ids:?}");
        }
    }

    #[test]
    fn each_slot_flip_changes_only_its_rules() {
        let t = default_template();
        let clean = best(&t);
        let cases = [
            ("lang", vec!["html-has-lang"]),
            ("title", vec!["document-title"]),
            ("viewport", vec!["meta-viewport"]),
            ("main", vec!["region", "landmark-one-main"]),
            ("heading", vec!["page-has-heading-one", "heading-order"]),
            ("img-alt", vec!["image-alt"]),
            ("text-color", vec!["color-contrast"]),
            ("link-text", vec!["link-name"]),
        ];
        for (name, rules) in cases {
            let j = t.slots().iter().position(|s| s.name() == name).unwrap();
            let mut v = clean.clone();
            v[j] = 0;
            let r = audit_choices(&t, &v);
            let ids: Vec<_> = r.violations.iter().map(|v| v.rule_id).collect();
            let mut want = rules.clone();
            want.sort_unstable();
            let mut got = ids.clone();
            got.sort_unstable();
            assert_eq!(got, want, "slot {name}");
            assert!(r.violations.iter().all(|v| v.nodes.len() == 1), "slot {name}");
        }
    }

    #[test]
    fn dropping_alt_adds_one_critical() {
        let t = default_template();
        let j = t.slots().iter().position(|s| s.name() == "img-alt").unwrap();
        let mut v = best(&t);
        v[j] = 0;
        let r = audit_choices(&t, &v);
        assert_eq!(r.counts.get(Severity::Critical), 1);
        assert_eq!(r.counts.total(), 1);
        assert_eq!(r.violations[0].rule_id, "image-alt");
    }

    #[test]
    fn every_vector_parses() {
        let t = default_template();
        let sizes: Vec<usize> = t.slots().iter().map(|s| s.len()).collect();
        let mut v = vec![0; sizes.len()];
        let mut n = 0;
        loop {
            let html = t.render(&v);
            assert!(parse_html(&html).is_ok());
            n += 1;
            let mut j = 0;
            while j < v.len() {
                v[j] += 1;
                if v[j] < sizes[j] {
                    break;
                }
                v[j] = 0;
                j += 1;
            }
            if j == v.len() {
                break;
            }
        }
        assert_eq!(n, sizes.iter().product::<usize>());
    }

    #[test]
    fn template_validation() {
        let slots = default_slots();
        assert!(PageTemplate::new("<p>{{nope}}</p>", slots.clone()).is_err());
        assert!(PageTemplate::new("<p>{{lang}}</p>", slots.clone()).is_err());
        assert!(PageTemplate::new("<p>{{lang</p>", slots).is_err());
    }
}
