use super::DomNode;

/// Element predicate used by [`query`](super::query).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Any,
    Tag(String),
    HasAttr(String),
    AttrEq(String, String),
    /// First token of `role`, compared case-insensitively.
    Role(String),
    All(Vec<Selector>),
    OneOf(Vec<Selector>),
}

impl Selector {
    pub fn tag(tag: &str) -> Self {
        Selector::Tag(tag.to_ascii_lowercase())
    }

    pub fn has_attr(name: &str) -> Self {
        Selector::HasAttr(name.to_ascii_lowercase())
    }

    pub fn attr_eq(name: &str, value: &str) -> Self {
        Selector::AttrEq(name.to_ascii_lowercase(), value.to_string())
    }

    pub fn role(role: &str) -> Self {
        Selector::Role(role.to_ascii_lowercase())
    }

    pub fn and(self, other: Selector) -> Self {
        match self {
            Selector::All(mut parts) => {
                parts.push(other);
                Selector::All(parts)
            }
            s => Selector::All(vec![s, other]),
        }
    }

    pub fn matches(&self, node: &DomNode) -> bool {
        if !node.is_element() {
            return false;
        }
        match self {
            Selector::Any => true,
            Selector::Tag(t) => node.is(t),
            Selector::HasAttr(a) => node.has_attr(a),
            Selector::AttrEq(a, v) => node.attr(a) == Some(v.as_str()),
            Selector::Role(r) => node.role().as_deref() == Some(r.as_str()),
            Selector::All(parts) => parts.iter().all(|p| p.matches(node)),
            Selector::OneOf(parts) => parts.iter().any(|p| p.matches(node)),
        }
    }
}
