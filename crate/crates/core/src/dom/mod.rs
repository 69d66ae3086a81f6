//! Arena-backed HTML document tree.
//!
//! Documents are produced by [`parse_html`] and are immutable afterwards. Node
//! ids are dense indices into the arena, and because the tree builder only ever
//! appends to the rightmost open path, id order is also document order.

mod parse;
mod query;

use std::ops::Range;

use serde::Serialize;

pub use parse::{parse_bytes, parse_html, parse_html_with, ParseOptions, DEFAULT_SIZE_LIMIT};
pub use query::Selector;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum DomError {
    #[error("input is {size} bytes, exceeding the {limit}-byte limit")]
    SizeLimit { size: usize, limit: usize },
    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),
}

/// Index of a node inside a [`DomDocument`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub(crate) usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// The synthetic root. Never counted as an element.
    Document,
    Element,
    Text,
    Comment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomNode {
    kind: NodeKind,
    tag: String,
    attributes: Vec<(String, String)>,
    text: String,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    span: Range<usize>,
}

impl DomNode {
    fn new(kind: NodeKind, parent: Option<NodeId>, span: Range<usize>) -> Self {
        Self {
            kind,
            tag: String::new(),
            attributes: Vec::new(),
            text: String::new(),
            parent,
            children: Vec::new(),
            span,
        }
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn is_element(&self) -> bool {
        self.kind == NodeKind::Element
    }

    pub fn is_text(&self) -> bool {
        self.kind == NodeKind::Text
    }

    /// Lowercase tag name for elements, `None` otherwise.
    pub fn tag(&self) -> Option<&str> {
        self.is_element().then_some(self.tag.as_str())
    }

    /// True when this is an element with the given (lowercase) tag.
    pub fn is(&self, tag: &str) -> bool {
        self.is_element() && self.tag == tag
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    pub fn has_attr(&self, name: &str) -> bool {
        self.attr(name).is_some()
    }

    /// Attributes in source order, first occurrence of each name only.
    pub fn attributes(&self) -> &[(String, String)] {
        &self.attributes
    }

    /// Character data of text and comment nodes.
    pub fn text(&self) -> Option<&str> {
        matches!(self.kind, NodeKind::Text | NodeKind::Comment).then_some(self.text.as_str())
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    /// First token of the `role` attribute, lowercased.
    pub fn role(&self) -> Option<String> {
        self.attr("role")
            .and_then(|r| r.split_ascii_whitespace().next())
            .map(|r| r.to_ascii_lowercase())
    }

    /// Byte range of this node's start tag (elements) or data (text/comments)
    /// in the original source.
    pub fn span(&self) -> Range<usize> {
        self.span.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomDocument {
    nodes: Vec<DomNode>,
    doctype_present: bool,
    source: String,
}

impl DomDocument {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &DomNode {
        &self.nodes[id.0]
    }

    pub fn get(&self, id: NodeId) -> Option<&DomNode> {
        self.nodes.get(id.0)
    }

    /// Number of nodes of every kind, including the root.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn doctype_present(&self) -> bool {
        self.doctype_present
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// All node ids in document order, root first.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.descendants(self.root())
    }

    /// Element ids in document order.
    pub fn elements(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(|&id| self.node(id).is_element())
    }

    /// Pre-order traversal of the subtree rooted at `id` (inclusive).
    pub fn descendants(&self, id: NodeId) -> Descendants<'_> {
        Descendants {
            doc: self,
            stack: vec![id],
        }
    }

    /// Strict ancestors of `id`, nearest first. Includes the root.
    pub fn ancestors(&self, id: NodeId) -> Ancestors<'_> {
        Ancestors {
            doc: self,
            next: self.node(id).parent,
        }
    }

    /// Strict element ancestors of `id`, nearest first.
    pub fn element_ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.ancestors(id).filter(|&a| self.node(a).is_element())
    }

    /// Element children of `id` in source order.
    pub fn child_elements(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.node(id)
            .children
            .iter()
            .copied()
            .filter(|&c| self.node(c).is_element())
    }

    /// Concatenated data of all text descendants.
    pub fn text_content(&self, id: NodeId) -> String {
        self.descendants(id)
            .filter_map(|d| {
                let n = self.node(d);
                n.is_text().then_some(n.text.as_str())
            })
            .collect()
    }

    /// First element in document order with the given tag.
    pub fn first_element(&self, tag: &str) -> Option<NodeId> {
        self.elements().find(|&id| self.node(id).is(tag))
    }

    /// First element in document order whose `id` attribute equals `value`.
    pub fn element_by_id(&self, value: &str) -> Option<NodeId> {
        self.elements().find(|&id| self.node(id).attr("id") == Some(value))
    }

    /// Source text of the node's start tag, cut to at most `max_chars`.
    pub fn snippet(&self, id: NodeId, max_chars: usize) -> String {
        let node = self.node(id);
        if node.kind == NodeKind::Document {
            return "#document".to_string();
        }
        let raw = self.source.get(node.span.clone()).unwrap_or_default();
        match raw.char_indices().nth(max_chars) {
            Some((cut, _)) => raw[..cut].to_string(),
            None => raw.to_string(),
        }
    }
}

pub struct Descendants<'a> {
    doc: &'a DomDocument,
    stack: Vec<NodeId>,
}

impl Iterator for Descendants<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let id = self.stack.pop()?;
        self.stack.extend(self.doc.node(id).children.iter().rev().copied());
        Some(id)
    }
}

pub struct Ancestors<'a> {
    doc: &'a DomDocument,
    next: Option<NodeId>,
}

impl Iterator for Ancestors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let id = self.next?;
        self.next = self.doc.node(id).parent;
        Some(id)
    }
}

/// Number of element nodes. The root, text and comments are not counted.
pub fn count_elements(doc: &DomDocument) -> usize {
    doc.nodes.iter().filter(|n| n.is_element()).count()
}

/// Matching elements in depth-first document order.
pub fn query(doc: &DomDocument, selector: &Selector) -> Vec<NodeId> {
    doc.elements().filter(|&id| selector.matches(doc.node(id))).collect()
}

/// Elements that never take children.
pub fn is_void(tag: &str) -> bool {
    matches!(
        tag,
        "area"
            | "base"
            | "br"
            | "col"
            | "embed"
            | "hr"
            | "img"
            | "input"
            | "keygen"
            | "link"
            | "meta"
            | "param"
            | "source"
            | "track"
            | "wbr"
    )
}

/// Elements whose content is taken verbatim up to the matching end tag.
pub(crate) fn is_raw_text(tag: &str) -> bool {
    matches!(tag, "script" | "style" | "xmp" | "iframe" | "noembed" | "noframes")
}

/// Elements whose content is text with character references but no markup.
pub(crate) fn is_escapable_raw_text(tag: &str) -> bool {
    matches!(tag, "title" | "textarea")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancestors_and_descendants_agree() {
        let doc = parse_html("<div><section><p>a<b>c</b></p></section></div>").unwrap();
        let b = query(&doc, &Selector::tag("b"))[0];
        let chain: Vec<_> = doc
            .element_ancestors(b)
            .map(|a| doc.node(a).tag().unwrap().to_string())
            .collect();
        assert_eq!(chain, ["p", "section", "div"]);
        let div = query(&doc, &Selector::tag("div"))[0];
        assert!(doc.descendants(div).any(|d| d == b));
    }

    #[test]
    fn ids_are_document_order() {
        let doc = parse_html("<ul><li>a<li>b</ul><p>x<span>y</span></p>").unwrap();
        let order: Vec<_> = doc.ids().collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
    }

    #[test]
    fn snippet_is_start_tag_and_truncated() {
        let doc = parse_html(r#"<a href="/x" class="c">text</a>"#).unwrap();
        let a = doc.first_element("a").unwrap();
        assert_eq!(doc.snippet(a, 120), r#"<a href="/x" class="c">"#);
        assert_eq!(doc.snippet(a, 5), "<a hr");
        assert_eq!(doc.snippet(doc.root(), 120), "#document");
    }

    #[test]
    fn text_content_concatenates() {
        let doc = parse_html("<p>a <em>b</em> c</p>").unwrap();
        let p = doc.first_element("p").unwrap();
        assert_eq!(doc.text_content(p), "a b c");
    }
}
