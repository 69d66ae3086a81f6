//! One function per catalog rule. Each returns offending nodes; the engine
//! removes duplicates and orders them.

use std::collections::{HashMap, HashSet};

use super::names::{
    document_node, has_aria_name, has_discernible_text, has_label, heading_level, in_non_rendered, is_hidden, nonblank,
};
use super::AuditContext;
use crate::dom::{DomDocument, NodeId};
use crate::style::{contrast_ratio, resolve_text_style};

/// Normal-text AA threshold.
pub const CONTRAST_NORMAL: f64 = 4.5;
/// Large-text AA threshold.
pub const CONTRAST_LARGE: f64 = 3.0;

fn elements_where<'a>(doc: &'a DomDocument, pred: impl Fn(NodeId) -> bool + 'a) -> impl Iterator<Item = NodeId> + 'a {
    doc.elements().filter(move |&id| pred(id))
}

fn tagged(doc: &DomDocument, tag: &str) -> Vec<NodeId> {
    doc.elements().filter(|&id| doc.node(id).is(tag)).collect()
}

fn input_type(doc: &DomDocument, id: NodeId) -> String {
    doc.node(id)
        .attr("type")
        .map(|t| t.trim().to_ascii_lowercase())
        .unwrap_or_else(|| "text".to_string())
}

fn is_presentational(doc: &DomDocument, id: NodeId) -> bool {
    matches!(doc.node(id).role().as_deref(), Some("none" | "presentation"))
}

pub fn image_alt(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    tagged(doc, "img")
        .into_iter()
        .filter(|&id| {
            let n = doc.node(id);
            !is_presentational(doc, id)
                && !is_hidden(doc, id)
                && !n.has_attr("alt")
                && !has_aria_name(doc, id)
                && !nonblank(n.attr("title"))
        })
        .collect()
}

pub fn area_alt(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| doc.node(id).is("area") && doc.node(id).has_attr("href"))
        .filter(|&id| !nonblank(doc.node(id).attr("alt")) && !has_aria_name(doc, id))
        .collect()
}

pub fn input_image_alt(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| doc.node(id).is("input") && input_type(doc, id) == "image")
        .filter(|&id| {
            let n = doc.node(id);
            !nonblank(n.attr("alt")) && !nonblank(n.attr("title")) && !has_aria_name(doc, id)
        })
        .collect()
}

pub fn button_name(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    tagged(doc, "button")
        .into_iter()
        .filter(|&id| !is_hidden(doc, id) && !has_discernible_text(doc, id))
        .collect()
}

/// `type=button` needs a nonempty value; submit/reset fall back to a browser
/// label unless `value` is present and empty.
pub fn input_button_name(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| doc.node(id).is("input"))
        .filter(|&id| {
            let n = doc.node(id);
            let named = has_aria_name(doc, id);
            match input_type(doc, id).as_str() {
                "button" => !nonblank(n.attr("value")) && !named,
                "submit" | "reset" => n.attr("value").is_some_and(|v| v.trim().is_empty()) && !named,
                _ => false,
            }
        })
        .filter(|&id| !is_hidden(doc, id))
        .collect()
}

pub fn link_name(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| doc.node(id).is("a") && doc.node(id).has_attr("href"))
        .filter(|&id| !is_hidden(doc, id) && !has_discernible_text(doc, id))
        .collect()
}

pub fn label(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| {
        let n = doc.node(id);
        match n.tag() {
            Some("input") => !matches!(input_type(doc, id).as_str(), "hidden" | "submit" | "button" | "image"),
            Some("select" | "textarea") => true,
            _ => false,
        }
    })
    .filter(|&id| !is_hidden(doc, id) && !has_label(doc, id))
    .collect()
}

pub fn select_name(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    tagged(doc, "select")
        .into_iter()
        .filter(|&id| !is_hidden(doc, id) && !has_label(doc, id))
        .collect()
}

pub fn document_title(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    let titled = elements_where(doc, |id| doc.node(id).is("title"))
        .filter(|&id| !doc.element_ancestors(id).any(|a| doc.node(a).is("svg")))
        .any(|id| !doc.text_content(id).trim().is_empty());
    if titled {
        vec![]
    } else {
        vec![document_node(doc)]
    }
}

pub fn html_has_lang(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    match doc.first_element("html") {
        Some(html) => {
            let n = doc.node(html);
            if nonblank(n.attr("lang")) || nonblank(n.attr("xml:lang")) {
                vec![]
            } else {
                vec![html]
            }
        }
        None => vec![doc.root()],
    }
}

/// Language tag shape: a 2-3 letter primary subtag followed by
/// 1-8 character alphanumeric subtags.
pub(crate) fn is_valid_lang(tag: &str) -> bool {
    let mut parts = tag.trim().split('-');
    let primary = parts.next().unwrap_or_default();
    (2..=3).contains(&primary.len())
        && primary.bytes().all(|b| b.is_ascii_alphabetic())
        && parts.all(|p| (1..=8).contains(&p.len()) && p.bytes().all(|b| b.is_ascii_alphanumeric()))
}

pub fn html_lang_valid(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    doc.first_element("html")
        .filter(|&html| {
            doc.node(html)
                .attr("lang")
                .is_some_and(|l| !l.trim().is_empty() && !is_valid_lang(l))
        })
        .into_iter()
        .collect()
}

const ID_REFERENCE_ATTRS: [&str; 8] = [
    "aria-labelledby",
    "aria-describedby",
    "aria-controls",
    "aria-owns",
    "aria-flowto",
    "aria-activedescendant",
    "aria-details",
    "aria-errormessage",
];

/// Second and later holders of each repeated id, split by whether the id is
/// referenced from ARIA attributes or `<label for>`.
fn duplicate_ids(doc: &DomDocument) -> (Vec<NodeId>, Vec<NodeId>) {
    let mut referenced: HashSet<&str> = HashSet::new();
    for id in doc.elements() {
        let n = doc.node(id);
        for attr in ID_REFERENCE_ATTRS {
            if let Some(v) = n.attr(attr) {
                referenced.extend(v.split_ascii_whitespace());
            }
        }
        if n.is("label") {
            if let Some(f) = n.attr("for") {
                referenced.insert(f);
            }
        }
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let (mut plain, mut aria) = (Vec::new(), Vec::new());
    for id in doc.elements() {
        let Some(value) = doc.node(id).attr("id").filter(|v| !v.is_empty()) else {
            continue;
        };
        let count = seen.entry(value).or_insert(0);
        *count += 1;
        if *count > 1 {
            if referenced.contains(value) {
                aria.push(id);
            } else {
                plain.push(id);
            }
        }
    }
    (plain, aria)
}

pub fn duplicate_id(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    duplicate_ids(ctx.doc).0
}

pub fn duplicate_id_aria(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    duplicate_ids(ctx.doc).1
}

/// Zoom is disabled by `user-scalable=no` (or `0`) or limited by `maximum-scale < 2`.
pub(crate) fn viewport_blocks_zoom(content: &str) -> bool {
    content
        .split([',', ';'])
        .filter_map(|kv| kv.split_once('='))
        .any(|(k, v)| {
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_ascii_lowercase());
            match k.as_str() {
                "user-scalable" => v == "no" || v == "0",
                "maximum-scale" => v.parse::<f64>().is_ok_and(|s| s < 2.0),
                _ => false,
            }
        })
}

pub fn meta_viewport(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| {
        let n = doc.node(id);
        n.is("meta")
            && n.attr("name")
                .is_some_and(|v| v.trim().eq_ignore_ascii_case("viewport"))
    })
    .filter(|&id| doc.node(id).attr("content").is_some_and(viewport_blocks_zoom))
    .collect()
}

/// Flags the parent element of each visible text run whose contrast falls
/// below 4.5:1, or 3:1 for large text. Unresolvable styles are skipped.
pub fn color_contrast(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    let mut out = Vec::new();
    for id in doc.ids() {
        let node = doc.node(id);
        if !node.is_text() || node.text().is_none_or(|t| t.trim().is_empty()) {
            continue;
        }
        let Some(parent) = node.parent().filter(|&p| doc.node(p).is_element()) else {
            continue;
        };
        if in_non_rendered(doc, parent) || is_hidden(doc, parent) {
            continue;
        }
        let Ok(style) = resolve_text_style(doc, id, ctx.class_map) else {
            continue;
        };
        let ratio = contrast_ratio::<f64>(style.foreground, style.background);
        let needed = if style.is_large_text() {
            CONTRAST_LARGE
        } else {
            CONTRAST_NORMAL
        };
        if ratio < needed {
            out.push(parent);
        }
    }
    out
}

pub(crate) fn is_landmark(doc: &DomDocument, id: NodeId) -> bool {
    let n = doc.node(id);
    let named = || has_aria_name(doc, id) || nonblank(n.attr("title"));
    match n.role().as_deref() {
        Some("main" | "navigation" | "banner" | "contentinfo" | "complementary") => return true,
        Some("region" | "form") => return named(),
        Some(_) => return false,
        None => {}
    }
    match n.tag() {
        Some("main" | "nav" | "header" | "footer" | "aside") => true,
        Some("form" | "section") => named(),
        _ => false,
    }
}

fn is_content_element(doc: &DomDocument, id: NodeId) -> bool {
    match doc.node(id).tag() {
        Some(
            "img" | "select" | "textarea" | "button" | "video" | "audio" | "iframe" | "canvas" | "svg" | "object"
            | "embed",
        ) => true,
        Some("input") => input_type(doc, id) != "hidden",
        _ => false,
    }
}

/// The outermost non-boundary element holding `content`: the child of
/// `<body>` (or `<html>`) on its ancestor chain.
fn region_container(doc: &DomDocument, content: NodeId) -> NodeId {
    let chain: Vec<NodeId> = std::iter::once(content)
        .filter(|&c| doc.node(c).is_element())
        .chain(doc.element_ancestors(content))
        .collect();
    match chain
        .iter()
        .position(|&e| matches!(doc.node(e).tag(), Some("body" | "html")))
    {
        Some(0) => chain[0],
        Some(b) => chain[b - 1],
        None => chain.last().copied().unwrap_or_else(|| doc.root()),
    }
}

/// Visible text and embedded content must sit inside a landmark.
pub fn region(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    let mut out = Vec::new();
    let mut stack = vec![(doc.root(), false)];
    while let Some((id, inside)) = stack.pop() {
        let node = doc.node(id);
        if node.is_element() {
            if node.tag().is_some_and(super::names::is_non_rendered) || is_hidden(doc, id) {
                continue;
            }
            if !inside && is_content_element(doc, id) {
                out.push(region_container(doc, id));
                continue;
            }
        } else if node.is_text() {
            if !inside && node.text().is_some_and(|t| !t.trim().is_empty()) {
                out.push(region_container(doc, id));
            }
            continue;
        }
        let inside = inside || (node.is_element() && is_landmark(doc, id));
        stack.extend(node.children().iter().rev().map(|&c| (c, inside)));
    }
    out
}

fn main_landmarks(doc: &DomDocument) -> Vec<NodeId> {
    elements_where(doc, |id| {
        let n = doc.node(id);
        match n.role() {
            Some(r) => r == "main",
            None => n.is("main"),
        }
    })
    .collect()
}

pub fn landmark_one_main(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    if main_landmarks(ctx.doc).is_empty() {
        vec![document_node(ctx.doc)]
    } else {
        vec![]
    }
}

pub fn landmark_no_duplicate_main(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    main_landmarks(ctx.doc).into_iter().skip(1).collect()
}

pub fn page_has_heading_one(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    if doc
        .elements()
        .any(|id| heading_level(doc, id) == Some(1) && !is_hidden(doc, id))
    {
        vec![]
    } else {
        vec![document_node(doc)]
    }
}

/// A heading may go at most one level deeper than the previous heading.
pub fn heading_order(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    let mut out = Vec::new();
    let mut previous: Option<u8> = None;
    for id in doc.elements() {
        let Some(level) = heading_level(doc, id) else {
            continue;
        };
        if is_hidden(doc, id) {
            continue;
        }
        if previous.is_some_and(|p| level > p + 1) {
            out.push(id);
        }
        previous = Some(level);
    }
    out
}

pub fn empty_heading(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| heading_level(doc, id).is_some())
        .filter(|&id| !is_hidden(doc, id) && !has_discernible_text(doc, id))
        .collect()
}

/// `<ul>`/`<ol>` may only directly contain `<li>`, `<script>`, `<template>`
/// and whitespace.
pub fn list(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| {
        let n = doc.node(id);
        (n.is("ul") || n.is("ol")) && n.role().is_none_or(|r| r == "list")
    })
    .filter(|&id| {
        doc.node(id).children().iter().any(|&c| {
            let child = doc.node(c);
            match child.tag() {
                Some(t) => !matches!(t, "li" | "script" | "template"),
                None => child.is_text() && child.text().is_some_and(|t| !t.trim().is_empty()),
            }
        })
    })
    .collect()
}

pub fn listitem(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| {
        let n = doc.node(id);
        n.is("li") && n.role().is_none_or(|r| r == "listitem")
    })
    .filter(|&id| {
        let parent = doc.node(id).parent().map(|p| doc.node(p));
        !parent.is_some_and(|p| matches!(p.tag(), Some("ul" | "ol" | "menu")) || p.role().as_deref() == Some("list"))
    })
    .collect()
}

pub fn tabindex(ctx: &AuditContext<'_>) -> Vec<NodeId> {
    let doc = ctx.doc;
    elements_where(doc, |id| {
        doc.node(id)
            .attr("tabindex")
            .and_then(|v| v.trim().parse::<i64>().ok())
            .is_some_and(|v| v > 0)
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_html;
    use crate::rules::names::visible_text;

    /// Visible text of each region-flagged container.
    fn uncovered_text(doc: &DomDocument) -> Vec<String> {
        let ctx = AuditContext {
            doc,
            class_map: &crate::style::ClassStyleMap::empty(),
        };
        region(&ctx).into_iter().map(|id| visible_text(doc, id)).collect()
    }

    #[test]
    fn lang_tag_shapes() {
        for ok in ["en", "EN-us", "zh-Hant-TW", "ast", "de-1996"] {
            assert!(is_valid_lang(ok), "{ok}");
        }
        for bad in ["english", "e", "en_US", "en-", "12", "en-toolongsubtag"] {
            assert!(!is_valid_lang(bad), "{bad}");
        }
    }

    #[test]
    fn viewport_content_parsing() {
        assert!(viewport_blocks_zoom("width=device-width, user-scalable=no"));
        assert!(viewport_blocks_zoom("width=device-width; user-scalable = 0"));
        assert!(viewport_blocks_zoom("maximum-scale=1.5"));
        assert!(!viewport_blocks_zoom("width=device-width, initial-scale=1"));
        assert!(!viewport_blocks_zoom("maximum-scale=2, user-scalable=yes"));
    }

    #[test]
    fn region_flags_outermost_container() {
        let doc = parse_html(
            "<html><body><main><p>in</p></main><div><section><p>out</p></section></div>tail<footer>f</footer></body></html>",
        )
        .unwrap();
        assert_eq!(uncovered_text(&doc), ["out", "in out tail f"]);
        let doc = parse_html("<p>a</p><p>b</p>").unwrap();
        assert_eq!(uncovered_text(&doc), ["a", "b"]);
        let doc = parse_html("bare").unwrap();
        assert_eq!(
            region(&AuditContext {
                doc: &doc,
                class_map: &Default::default()
            }),
            vec![doc.root()]
        );
    }

    #[test]
    fn named_section_is_a_landmark() {
        let doc =
            parse_html(r#"<body><section aria-label="News"><p>x</p></section><section><p>y</p></section></body>"#)
                .unwrap();
        assert_eq!(uncovered_text(&doc), ["y"]);
    }
}
