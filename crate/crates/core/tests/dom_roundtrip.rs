mod common;

use a11y_core::dom::{count_elements, is_void, query, DomDocument, NodeId, NodeKind, Selector};
use a11y_core::parse_html;
use proptest::prelude::*;

/// Test-only serializer: explicit end tags, escaped text and attributes.
fn serialize(doc: &DomDocument) -> String {
    let mut out = String::new();
    if doc.doctype_present() {
        out.push_str("<!DOCTYPE html>");
    }
    for &c in doc.node(doc.root()).children() {
        write_node(doc, c, false, &mut out);
    }
    out
}

fn write_node(doc: &DomDocument, id: NodeId, raw: bool, out: &mut String) {
    let n = doc.node(id);
    match n.kind() {
        NodeKind::Text if raw => out.push_str(n.text().unwrap()),
        NodeKind::Text => out.push_str(
            &n.text()
                .unwrap()
                .replace('&', "&amp;")
                .replace('<', "&lt;")
                .replace('>', "&gt;"),
        ),
        NodeKind::Comment => {
            out.push_str("<!--");
            out.push_str(n.text().unwrap());
            out.push_str("-->");
        }
        NodeKind::Element => {
            let tag = n.tag().unwrap();
            out.push('<');
            out.push_str(tag);
            for (k, v) in n.attributes() {
                out.push_str(&format!(" {k}=\"{}\"", v.replace('&', "&amp;").replace('"', "&quot;")));
            }
            out.push('>');
            if is_void(tag) {
                return;
            }
            let raw = matches!(tag, "script" | "style" | "textarea" | "title");
            for &c in n.children() {
                write_node(doc, c, raw, out);
            }
            out.push_str(&format!("</{tag}>"));
        }
        NodeKind::Document => unreachable!(),
    }
}

#[derive(Debug, PartialEq)]
enum Shape {
    Element(String, Vec<(String, String)>, Vec<Shape>),
    Text(String),
    Comment(String),
}

fn shape(doc: &DomDocument, id: NodeId) -> Vec<Shape> {
    doc.node(id)
        .children()
        .iter()
        .map(|&c| {
            let n = doc.node(c);
            match n.kind() {
                NodeKind::Element => Shape::Element(n.tag().unwrap().into(), n.attributes().to_vec(), shape(doc, c)),
                NodeKind::Text => Shape::Text(n.text().unwrap().into()),
                NodeKind::Comment => Shape::Comment(n.text().unwrap().into()),
                NodeKind::Document => unreachable!(),
            }
        })
        .collect()
}

fn assert_round_trip(html: &str) {
    let a = parse_html(html).unwrap();
    let b = parse_html(&serialize(&a)).unwrap();
    assert_eq!(shape(&a, a.root()), shape(&b, b.root()), "{html}");
    assert_eq!(a.doctype_present(), b.doctype_present());
}

fn assert_tree_invariants(doc: &DomDocument) {
    let root = doc.root();
    assert!(doc.node(root).parent().is_none());
    let mut seen = 0;
    for id in doc.ids() {
        seen += 1;
        if id == root {
            continue;
        }
        let parent = doc.node(id).parent().expect("non-root node has a parent");
        assert!(doc.node(parent).children().contains(&id));
        assert!(doc.ancestors(id).take(doc.len() + 1).count() <= doc.len());
        assert_eq!(doc.ancestors(id).last(), Some(root));
        for &c in doc.node(id).children() {
            assert_eq!(doc.node(c).parent(), Some(id));
        }
    }
    assert_eq!(seen, doc.len());
    assert_eq!(count_elements(doc), query(doc, &Selector::Any).len());
}

#[test]
fn fixtures_round_trip() {
    for f in common::manifest().fixtures {
        assert_round_trip(&common::read_fixture(&f.file));
    }
}

#[test]
fn recovered_markup_round_trips() {
    for html in [
        "<p>one<p>two<div>three</span></div>",
        "<ul><li>a<li>b</ul><table><tr><td>1<td>2</table>",
        "<h2>x<h3>y</h3><a href=#>1<a href=#>2",
        "<script>if (a < b && c) {}</script><style>p > a {}</style>",
        "<title>a &amp; b</title><textarea>x < y</textarea>",
        "<!doctype html><!-- note --><img alt='q\"uote'><br/>tail &nbsp;&#65;&#x42;",
        "<div a=1 A=2 b>text",
    ] {
        assert_round_trip(html);
    }
}

#[test]
fn corpus_trees_hold_invariants() {
    for f in common::manifest().fixtures {
        assert_tree_invariants(&parse_html(&common::read_fixture(&f.file)).unwrap());
    }
}

// Generated trees use tags without implied-end behavior and never place two
// text nodes side by side, so every tree has exactly one serialization.
#[derive(Debug, Clone)]
enum Gen {
    Element(&'static str, Vec<(String, String)>, Vec<Gen>),
    Text(String),
}

const TAGS: &[&str] = &[
    "div", "span", "section", "em", "strong", "main", "nav", "article", "b", "label",
];

fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9<>&\"' .,;:!?éß中]{0,12}[a-zA-Z]".prop_map(|s| s)
}

fn attrs() -> impl Strategy<Value = Vec<(String, String)>> {
    prop::collection::btree_map("[a-z]{1,5}", "[a-zA-Z0-9 <>&\"'=-]{0,8}", 0..3).prop_map(|m| m.into_iter().collect())
}

fn tree() -> impl Strategy<Value = Gen> {
    let leaf = prop_oneof![
        text().prop_map(Gen::Text),
        (prop::sample::select(TAGS), attrs()).prop_map(|(t, a)| Gen::Element(t, a, vec![])),
    ];
    leaf.prop_recursive(4, 48, 5, |inner| {
        (prop::sample::select(TAGS), attrs(), prop::collection::vec(inner, 0..5))
            .prop_map(|(t, a, kids)| Gen::Element(t, a, merge_text(kids)))
    })
}

fn merge_text(kids: Vec<Gen>) -> Vec<Gen> {
    let mut out: Vec<Gen> = Vec::new();
    for k in kids {
        match (out.last_mut(), k) {
            (Some(Gen::Text(prev)), Gen::Text(t)) => prev.push_str(&t),
            (_, k) => out.push(k),
        }
    }
    out
}

fn render(g: &Gen, out: &mut String) {
    match g {
        Gen::Text(t) => out.push_str(&t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")),
        Gen::Element(tag, attrs, kids) => {
            out.push_str(&format!("<{tag}"));
            for (k, v) in attrs {
                out.push_str(&format!(" {k}=\"{}\"", v.replace('&', "&amp;").replace('"', "&quot;")));
            }
            out.push('>');
            for k in kids {
                render(k, out);
            }
            out.push_str(&format!("</{tag}>"));
        }
    }
}

fn expected(g: &Gen) -> Shape {
    match g {
        Gen::Text(t) => Shape::Text(t.clone()),
        Gen::Element(tag, attrs, kids) => {
            Shape::Element(tag.to_string(), attrs.clone(), kids.iter().map(expected).collect())
        }
    }
}

proptest! {
    #[test]
    fn generated_trees_parse_exactly(g in tree()) {
        let mut html = String::new();
        render(&g, &mut html);
        let doc = parse_html(&html).unwrap();
        prop_assert_eq!(shape(&doc, doc.root()), vec![expected(&g)]);
        assert_round_trip(&html);
        assert_tree_invariants(&doc);
    }

    #[test]
    fn arbitrary_text_parses_to_valid_tree(s in "(<[/!a-zA-Z]{0,3}|[ a-z=\"'>&;#]|\\PC){0,200}") {
        let doc = parse_html(&s).unwrap();
        assert_tree_invariants(&doc);
        assert_round_trip(&s);
    }
}
