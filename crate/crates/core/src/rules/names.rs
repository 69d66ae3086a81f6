//! Visibility and accessible-name helpers shared by the checks.

use crate::dom::{DomDocument, NodeId};

/// Elements whose text never renders as page content.
pub(crate) fn is_non_rendered(tag: &str) -> bool {
    matches!(
        tag,
        "head" | "title" | "script" | "style" | "template" | "noscript" | "meta" | "link"
    )
}

/// Hidden via `hidden`, `aria-hidden="true"` or an inline `display:none` /
/// `visibility:hidden` on the node or any ancestor.
pub(crate) fn is_hidden(doc: &DomDocument, id: NodeId) -> bool {
    std::iter::once(id)
        .chain(doc.ancestors(id))
        .filter(|&a| doc.node(a).is_element())
        .any(|a| {
            let n = doc.node(a);
            if n.has_attr("hidden")
                || n.attr("aria-hidden")
                    .is_some_and(|v| v.trim().eq_ignore_ascii_case("true"))
            {
                return true;
            }
            n.attr("style").is_some_and(|s| {
                let s: String = s.to_ascii_lowercase().split_whitespace().collect();
                s.contains("display:none") || s.contains("visibility:hidden")
            })
        })
}

/// True when the node sits inside head/script/style/template or similar.
pub(crate) fn in_non_rendered(doc: &DomDocument, id: NodeId) -> bool {
    std::iter::once(id)
        .chain(doc.ancestors(id))
        .any(|a| doc.node(a).tag().is_some_and(is_non_rendered))
}

pub(crate) fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub(crate) fn nonblank(v: Option<&str>) -> bool {
    v.is_some_and(|s| !s.trim().is_empty())
}

/// Rendered text under `id`, skipping non-rendered subtrees, whitespace collapsed.
pub(crate) fn visible_text(doc: &DomDocument, id: NodeId) -> String {
    visible_text_excluding(doc, id, None)
}

/// Like [`visible_text`] but ignoring the subtree rooted at `skip`.
pub(crate) fn visible_text_excluding(doc: &DomDocument, id: NodeId, skip: Option<NodeId>) -> String {
    let mut out = String::new();
    let mut stack = vec![id];
    while let Some(n) = stack.pop() {
        if Some(n) == skip {
            continue;
        }
        let node = doc.node(n);
        if node.tag().is_some_and(is_non_rendered) {
            continue;
        }
        if let Some(t) = node.text().filter(|_| node.is_text()) {
            out.push_str(t);
            out.push(' ');
        }
        stack.extend(node.children().iter().rev().copied());
    }
    collapse_whitespace(&out)
}

/// `aria-labelledby` resolves to at least one element with visible text.
pub(crate) fn labelledby_resolves(doc: &DomDocument, id: NodeId) -> bool {
    doc.node(id).attr("aria-labelledby").is_some_and(|refs| {
        refs.split_ascii_whitespace()
            .filter_map(|r| doc.element_by_id(r))
            .any(|target| !visible_text(doc, target).is_empty())
    })
}

/// Name from ARIA attributes alone.
pub(crate) fn has_aria_name(doc: &DomDocument, id: NodeId) -> bool {
    nonblank(doc.node(id).attr("aria-label")) || labelledby_resolves(doc, id)
}

/// Nonempty text after whitespace collapse, a nonempty `aria-label`, an
/// `aria-labelledby` that resolves to text, or a descendant image with
/// nonempty `alt`.
pub(crate) fn has_discernible_text(doc: &DomDocument, id: NodeId) -> bool {
    !visible_text(doc, id).is_empty()
        || has_aria_name(doc, id)
        || doc
            .descendants(id)
            .any(|d| doc.node(d).is("img") && nonblank(doc.node(d).attr("alt")))
}

/// A form control is labelled by `aria-label`, `aria-labelledby`, a
/// `<label for>` naming its id, or a wrapping `<label>` with text of its own.
pub(crate) fn has_label(doc: &DomDocument, id: NodeId) -> bool {
    if has_aria_name(doc, id) {
        return true;
    }
    if let Some(own_id) = doc.node(id).attr("id").filter(|v| !v.is_empty()) {
        let explicit = doc.elements().any(|l| {
            let n = doc.node(l);
            n.is("label") && n.attr("for") == Some(own_id) && !visible_text(doc, l).is_empty()
        });
        if explicit {
            return true;
        }
    }
    doc.element_ancestors(id)
        .find(|&a| doc.node(a).is("label"))
        .is_some_and(|label| !visible_text_excluding(doc, label, Some(id)).is_empty())
}

/// The `<html>` element, or the document root when there is none.
pub(crate) fn document_node(doc: &DomDocument) -> NodeId {
    doc.first_element("html").unwrap_or_else(|| doc.root())
}

/// Heading level of `h1`-`h6` or `role="heading"` (honouring `aria-level`,
/// default 2 for role headings).
pub(crate) fn heading_level(doc: &DomDocument, id: NodeId) -> Option<u8> {
    let n = doc.node(id);
    let aria_level = n
        .attr("aria-level")
        .and_then(|v| v.trim().parse::<u8>().ok())
        .filter(|l| (1..=9).contains(l));
    if n.role().as_deref() == Some("heading") {
        return Some(aria_level.unwrap_or(2));
    }
    let tag = n.tag()?;
    match tag.as_bytes() {
        [b'h', d @ b'1'..=b'6'] => Some(aria_level.unwrap_or(d - b'0')),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_html;

    fn first(doc: &DomDocument, tag: &str) -> NodeId {
        doc.first_element(tag).unwrap()
    }

    #[test]
    fn discernible_text_sources() {
        let cases = [
            ("<button>  Go </button>", true),
            ("<button>   </button>", false),
            (r#"<button aria-label="Close"></button>"#, true),
            (r#"<button aria-label="  "></button>"#, false),
            (
                r#"<span id="l">Label</span><button aria-labelledby="l"></button>"#,
                true,
            ),
            (
                r#"<span id="l"> </span><button aria-labelledby="l missing"></button>"#,
                false,
            ),
            (r#"<button><img src="x" alt="Search"></button>"#, true),
            (r#"<button><img src="x" alt=""></button>"#, false),
            (r#"<button><script>x</script></button>"#, false),
        ];
        for (src, want) in cases {
            let doc = parse_html(src).unwrap();
            assert_eq!(has_discernible_text(&doc, first(&doc, "button")), want, "{src}");
        }
    }

    #[test]
    fn label_association() {
        let cases = [
            (r#"<label for="a">Name</label><input id="a">"#, true),
            (r#"<label for="b">Name</label><input id="a">"#, false),
            (r#"<label>Name <input></label>"#, true),
            (r#"<label><input></label>"#, false),
            (r#"<input aria-label="Name">"#, true),
            (r#"<input placeholder="Name">"#, false),
        ];
        for (src, want) in cases {
            let doc = parse_html(src).unwrap();
            assert_eq!(has_label(&doc, first(&doc, "input")), want, "{src}");
        }
        let doc = parse_html("<label><select><option>One</option></select></label>").unwrap();
        assert!(!has_label(&doc, first(&doc, "select")));
    }

    #[test]
    fn hidden_detection() {
        let doc = parse_html(
            r#"<div style="display: none"><p>x</p></div><p aria-hidden="TRUE">y</p><p hidden>z</p><p>w</p>"#,
        )
        .unwrap();
        let ps: Vec<_> = doc.elements().filter(|&e| doc.node(e).is("p")).collect();
        let hidden: Vec<_> = ps.iter().map(|&p| is_hidden(&doc, p)).collect();
        assert_eq!(hidden, [true, true, true, false]);
    }

    #[test]
    fn heading_levels() {
        let doc = parse_html(r#"<h3>a</h3><div role="heading" aria-level="1">b</div><div role="heading">c</div><h2 aria-level="4">d</h2><p>e</p>"#)
            .unwrap();
        let levels: Vec<_> = doc.elements().filter_map(|e| heading_level(&doc, e)).collect();
        assert_eq!(levels, [3, 1, 2, 4]);
    }
}
