//! Error-recovering tokenizer and tree builder for a practical HTML5 subset.
//!
//! Recovery rules:
//! - unmatched end tags are dropped;
//! - a matched end tag closes everything opened after its element;
//! - a small table of implied end tags (`p`, `li`, `dt`/`dd`, `option`,
//!   `tr`/`td`/`th`, nested headings and anchors) is applied on start tags;
//! - whatever is still open at end of input is closed.
//!
//! There is no adoption-agency algorithm and no implied `html`/`head`/`body`.

use std::borrow::Cow;
use std::ops::Range;

use super::{is_escapable_raw_text, is_raw_text, is_void, DomDocument, DomError, DomNode, NodeId, NodeKind};

pub const DEFAULT_SIZE_LIMIT: usize = 4 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub size_limit: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            size_limit: DEFAULT_SIZE_LIMIT,
        }
    }
}

/// Parses with the default 4 MiB size limit. Never fails on malformed markup.
pub fn parse_html(input: &str) -> Result<DomDocument, DomError> {
    parse_html_with(input, &ParseOptions::default())
}

pub fn parse_html_with(input: &str, opts: &ParseOptions) -> Result<DomDocument, DomError> {
    if input.len() > opts.size_limit {
        return Err(DomError::SizeLimit {
            size: input.len(),
            limit: opts.size_limit,
        });
    }
    let mut builder = TreeBuilder::new(input);
    Tokenizer::new(input).run(&mut builder);
    Ok(builder.finish())
}

pub fn parse_bytes(input: &[u8], opts: &ParseOptions) -> Result<DomDocument, DomError> {
    if input.len() > opts.size_limit {
        return Err(DomError::SizeLimit {
            size: input.len(),
            limit: opts.size_limit,
        });
    }
    let text = std::str::from_utf8(input).map_err(|e| DomError::Encoding(e.to_string()))?;
    parse_html_with(text, opts)
}

#[derive(Debug)]
enum Token<'a> {
    StartTag {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
        span: Range<usize>,
    },
    EndTag {
        name: String,
    },
    Text {
        data: Cow<'a, str>,
        span: Range<usize>,
    },
    Comment {
        data: &'a str,
        span: Range<usize>,
    },
    Doctype,
}

struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn run(mut self, sink: &mut TreeBuilder) {
        while self.pos < self.src.len() {
            if self.rest().starts_with('<') {
                self.markup(sink);
            } else {
                let start = self.pos;
                let end = self.rest().find('<').map_or(self.src.len(), |i| start + i);
                self.pos = end;
                sink.token(Token::Text {
                    data: decode_entities(&self.src[start..end]),
                    span: start..end,
                });
            }
        }
    }

    /// Handles input starting at a `<`.
    fn markup(&mut self, sink: &mut TreeBuilder) {
        let start = self.pos;
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let next = bytes.get(1).copied();

        if let Some(body) = rest.strip_prefix("<!--") {
            let (data, consumed) = if body.starts_with('>') {
                ("", 5)
            } else if body.starts_with("->") {
                ("", 6)
            } else {
                match body.find("-->") {
                    Some(i) => (&body[..i], 4 + i + 3),
                    None => (body, rest.len()),
                }
            };
            self.pos += consumed;
            sink.token(Token::Comment {
                data,
                span: start..self.pos,
            });
        } else if rest.len() >= 9 && rest.as_bytes()[..9].eq_ignore_ascii_case(b"<!doctype") {
            self.pos += rest.find('>').map_or(rest.len(), |i| i + 1);
            sink.token(Token::Doctype);
        } else if let Some(body) = rest.strip_prefix("<![CDATA[") {
            let (data, consumed) = match body.find("]]>") {
                Some(i) => (&body[..i], 9 + i + 3),
                None => (body, rest.len()),
            };
            self.pos += consumed;
            sink.token(Token::Comment {
                data,
                span: start..self.pos,
            });
        } else if next == Some(b'!') {
            self.bogus_comment(2, sink);
        } else if next == Some(b'?') {
            self.bogus_comment(1, sink);
        } else if next == Some(b'/') {
            match bytes.get(2) {
                Some(c) if c.is_ascii_alphabetic() => {
                    let name_len = rest[2..]
                        .find(|c: char| c.is_ascii_whitespace() || c == '/' || c == '>')
                        .unwrap_or(rest.len() - 2);
                    let name = rest[2..2 + name_len].to_ascii_lowercase();
                    match rest.find('>') {
                        Some(i) => {
                            self.pos += i + 1;
                            sink.token(Token::EndTag { name });
                        }
                        // Unterminated end tag at EOF is dropped.
                        None => self.pos = self.src.len(),
                    }
                }
                Some(b'>') => self.pos += 3,
                None => self.text_literal(sink),
                Some(_) => self.bogus_comment(2, sink),
            }
        } else if next.is_some_and(|c| c.is_ascii_alphabetic()) {
            self.start_tag(sink);
        } else {
            self.text_literal(sink);
        }
    }

    fn text_literal(&mut self, sink: &mut TreeBuilder) {
        let start = self.pos;
        self.pos += 1;
        sink.token(Token::Text {
            data: Cow::Borrowed("<"),
            span: start..self.pos,
        });
    }

    fn bogus_comment(&mut self, skip: usize, sink: &mut TreeBuilder) {
        let start = self.pos;
        let body = &self.rest()[skip..];
        let (data, consumed) = match body.find('>') {
            Some(i) => (&body[..i], skip + i + 1),
            None => (body, skip + body.len()),
        };
        self.pos += consumed;
        sink.token(Token::Comment {
            data,
            span: start..self.pos,
        });
    }

    fn start_tag(&mut self, sink: &mut TreeBuilder) {
        let start = self.pos;
        let src = self.src;
        let mut i = start + 1;
        let name_end = src[i..]
            .find(|c: char| c.is_ascii_whitespace() || c == '/' || c == '>')
            .map_or(src.len(), |n| i + n);
        let name = src[i..name_end].to_ascii_lowercase();
        i = name_end;

        let mut attrs: Vec<(String, String)> = Vec::new();
        let mut self_closing = false;
        let b = src.as_bytes();
        loop {
            while i < b.len() && (b[i].is_ascii_whitespace() || (b[i] == b'/' && b.get(i + 1) != Some(&b'>'))) {
                i += 1;
            }
            if i >= b.len() {
                // EOF inside a tag: the tag is discarded.
                self.pos = src.len();
                return;
            }
            if b[i] == b'>' {
                i += 1;
                break;
            }
            if b[i] == b'/' {
                self_closing = true;
                i += 2;
                break;
            }
            let name_start = i;
            i += 1;
            while i < b.len() && !(b[i].is_ascii_whitespace() || matches!(b[i], b'/' | b'>' | b'=')) {
                i += 1;
            }
            let attr_name = src[name_start..i].to_ascii_lowercase();
            while i < b.len() && b[i].is_ascii_whitespace() {
                i += 1;
            }
            let mut value = String::new();
            if i < b.len() && b[i] == b'=' {
                i += 1;
                while i < b.len() && b[i].is_ascii_whitespace() {
                    i += 1;
                }
                if i < b.len() && (b[i] == b'"' || b[i] == b'\'') {
                    let quote = b[i];
                    let vstart = i + 1;
                    let vend = src[vstart..].find(quote as char).map_or(src.len(), |n| vstart + n);
                    value = decode_entities(&src[vstart..vend]).into_owned();
                    i = (vend + 1).min(src.len());
                } else {
                    let vstart = i;
                    while i < b.len() && !(b[i].is_ascii_whitespace() || b[i] == b'>') {
                        i += 1;
                    }
                    value = decode_entities(&src[vstart..i]).into_owned();
                }
            }
            if !attrs.iter().any(|(n, _)| *n == attr_name) {
                attrs.push((attr_name, value));
            }
        }
        let end = i.min(src.len());
        self.pos = end;

        let raw = is_raw_text(&name);
        let rcdata = is_escapable_raw_text(&name);
        sink.token(Token::StartTag {
            name: name.clone(),
            attrs,
            self_closing,
            span: start..end,
        });
        if (raw || rcdata) && !sink.last_start_was_dropped {
            self.raw_content(&name, rcdata, sink);
        }
    }

    /// Consumes everything up to `</name` (case-insensitive) as one text node.
    fn raw_content(&mut self, name: &str, decode: bool, sink: &mut TreeBuilder) {
        let start = self.pos;
        let rest = self.rest();
        let needle_len = 2 + name.len();
        let mut end = rest.len();
        let mut search = 0;
        while let Some(off) = rest[search..].find("</") {
            let at = search + off;
            let candidate = rest.get(at + 2..at + needle_len);
            let boundary = rest.as_bytes().get(at + needle_len);
            if candidate.is_some_and(|c| c.eq_ignore_ascii_case(name))
                && boundary.is_none_or(|c| c.is_ascii_whitespace() || *c == b'/' || *c == b'>')
            {
                end = at;
                break;
            }
            search = at + 2;
        }
        if end > 0 {
            let data = &rest[..end];
            sink.token(Token::Text {
                data: if decode {
                    decode_entities(data)
                } else {
                    Cow::Borrowed(data)
                },
                span: start..start + end,
            });
        }
        self.pos = start + end;
    }
}

/// Decodes `&amp; &lt; &gt; &quot; &apos; &nbsp;` and numeric references.
/// Anything else passes through literally.
pub(crate) fn decode_entities(s: &str) -> Cow<'_, str> {
    if !s.contains('&') {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        match decode_one(rest) {
            Some((ch, used)) => {
                out.push(ch);
                rest = &rest[used..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    Cow::Owned(out)
}

fn decode_one(s: &str) -> Option<(char, usize)> {
    const NAMED: [(&str, char); 6] = [
        ("&amp;", '&'),
        ("&lt;", '<'),
        ("&gt;", '>'),
        ("&quot;", '"'),
        ("&apos;", '\''),
        ("&nbsp;", '\u{a0}'),
    ];
    for (name, ch) in NAMED {
        if s.starts_with(name) {
            return Some((ch, name.len()));
        }
    }
    let body = s.strip_prefix("&#")?;
    let (radix, digits_at) = match body.as_bytes().first() {
        Some(b'x') | Some(b'X') => (16, 1),
        _ => (10, 0),
    };
    let digits = &body[digits_at..];
    let len = digits.find(|c: char| !c.is_digit(radix)).unwrap_or(digits.len());
    if len == 0 {
        return None;
    }
    let value = u32::from_str_radix(&digits[..len], radix).unwrap_or(u32::MAX);
    let ch = match value {
        0 => '\u{fffd}',
        v => char::from_u32(v).unwrap_or('\u{fffd}'),
    };
    let mut used = 2 + digits_at + len;
    if digits[len..].starts_with(';') {
        used += 1;
    }
    Some((ch, used))
}

struct TreeBuilder {
    nodes: Vec<DomNode>,
    open: Vec<NodeId>,
    doctype_present: bool,
    source: String,
    last_start_was_dropped: bool,
}

/// Elements that terminate scope searches for implied end tags.
fn is_scope_boundary(tag: &str) -> bool {
    matches!(
        tag,
        "html" | "table" | "td" | "th" | "caption" | "template" | "object" | "applet" | "marquee" | "svg" | "math"
    )
}

/// Start tags that implicitly close an open `<p>`.
fn closes_paragraph(tag: &str) -> bool {
    matches!(
        tag,
        "address"
            | "article"
            | "aside"
            | "blockquote"
            | "center"
            | "details"
            | "dialog"
            | "dir"
            | "div"
            | "dl"
            | "dd"
            | "dt"
            | "fieldset"
            | "figcaption"
            | "figure"
            | "footer"
            | "form"
            | "h1"
            | "h2"
            | "h3"
            | "h4"
            | "h5"
            | "h6"
            | "header"
            | "hgroup"
            | "hr"
            | "li"
            | "main"
            | "menu"
            | "nav"
            | "ol"
            | "p"
            | "pre"
            | "search"
            | "section"
            | "summary"
            | "table"
            | "ul"
    )
}

fn is_heading(tag: &str) -> bool {
    matches!(tag, "h1" | "h2" | "h3" | "h4" | "h5" | "h6")
}

impl TreeBuilder {
    fn new(source: &str) -> Self {
        Self {
            nodes: vec![DomNode::new(NodeKind::Document, None, 0..0)],
            open: Vec::new(),
            doctype_present: false,
            source: source.to_string(),
            last_start_was_dropped: false,
        }
    }

    fn current(&self) -> NodeId {
        self.open.last().copied().unwrap_or(NodeId(0))
    }

    fn tag_of(&self, id: NodeId) -> &str {
        &self.nodes[id.0].tag
    }

    fn in_foreign_content(&self) -> bool {
        self.open.iter().any(|&id| matches!(self.tag_of(id), "svg" | "math"))
    }

    fn append(&mut self, node: DomNode) -> NodeId {
        let id = NodeId(self.nodes.len());
        let parent = node.parent.expect("appended nodes have a parent");
        self.nodes.push(node);
        self.nodes[parent.0].children.push(id);
        id
    }

    /// Searches the open stack top-down for the nearest element accepted by
    /// `target`, giving up at any element accepted by `stop`. Pops it and
    /// everything above it when found.
    fn close_nearest(&mut self, target: impl Fn(&str) -> bool, stop: impl Fn(&str) -> bool) {
        for depth in (0..self.open.len()).rev() {
            let tag = self.tag_of(self.open[depth]);
            if target(tag) {
                self.open.truncate(depth);
                return;
            }
            if stop(tag) {
                return;
            }
        }
    }

    fn implied_end_tags(&mut self, tag: &str) {
        if closes_paragraph(tag) {
            self.close_nearest(|t| t == "p", |t| is_scope_boundary(t) || t == "button");
        }
        match tag {
            "li" => self.close_nearest(
                |t| t == "li",
                |t| is_scope_boundary(t) || matches!(t, "ul" | "ol" | "menu"),
            ),
            "dt" | "dd" => self.close_nearest(|t| matches!(t, "dt" | "dd"), |t| is_scope_boundary(t) || t == "dl"),
            "option" => {
                if self.tag_of(self.current()) == "option" {
                    self.open.pop();
                }
            }
            "optgroup" => {
                if self.tag_of(self.current()) == "option" {
                    self.open.pop();
                }
                if self.tag_of(self.current()) == "optgroup" {
                    self.open.pop();
                }
            }
            "tr" => self.close_nearest(|t| t == "tr", |t| matches!(t, "table" | "html" | "template")),
            "td" | "th" => self.close_nearest(
                |t| matches!(t, "td" | "th"),
                |t| matches!(t, "tr" | "table" | "html" | "template"),
            ),
            "a" => self.close_nearest(|t| t == "a", is_scope_boundary),
            "button" => self.close_nearest(|t| t == "button", is_scope_boundary),
            _ => {}
        }
        if is_heading(tag) && is_heading(self.tag_of(self.current())) {
            self.open.pop();
        }
    }

    fn token(&mut self, token: Token<'_>) {
        match token {
            Token::Doctype => self.doctype_present = true,
            Token::StartTag {
                name,
                attrs,
                self_closing,
                span,
            } => {
                self.last_start_was_dropped = false;
                if !self.in_foreign_content() {
                    self.implied_end_tags(&name);
                }
                let foreign = self.in_foreign_content() || matches!(name.as_str(), "svg" | "math");
                let leaf = is_void(&name) || (self_closing && foreign);
                let mut node = DomNode::new(NodeKind::Element, Some(self.current()), span);
                node.tag = name;
                node.attributes = attrs;
                let id = self.append(node);
                if !leaf {
                    self.open.push(id);
                } else if is_raw_text(self.tag_of(id)) || is_escapable_raw_text(self.tag_of(id)) {
                    // A self-closed raw-text element inside foreign content has no body.
                    self.last_start_was_dropped = true;
                }
            }
            Token::EndTag { name } => {
                if is_void(&name) {
                    return;
                }
                if let Some(depth) = self.open.iter().rposition(|&id| self.tag_of(id) == name) {
                    self.open.truncate(depth);
                }
            }
            Token::Text { data, span } => {
                if data.is_empty() {
                    return;
                }
                let parent = self.current();
                if let Some(&last) = self.nodes[parent.0].children.last() {
                    let prev = &mut self.nodes[last.0];
                    if prev.kind == NodeKind::Text {
                        prev.text.push_str(&data);
                        prev.span.end = span.end;
                        return;
                    }
                }
                let mut node = DomNode::new(NodeKind::Text, Some(parent), span);
                node.text = data.into_owned();
                self.append(node);
            }
            Token::Comment { data, span } => {
                let mut node = DomNode::new(NodeKind::Comment, Some(self.current()), span);
                node.text = data.to_string();
                self.append(node);
            }
        }
    }

    fn finish(self) -> DomDocument {
        DomDocument {
            nodes: self.nodes,
            doctype_present: self.doctype_present,
            source: self.source,
        }
    }
}
