//! Text color resolution and WCAG contrast math.

mod class_map;
mod color;

pub use class_map::{ClassMapError, ClassStyleMap, PartialStyle};
pub use color::{contrast_ratio, parse_color, relative_luminance, ColorParseError, Rgb};

use crate::dom::{DomDocument, NodeId};

/// Minimum size (px) for large text at normal weight.
pub const LARGE_TEXT_PX: f64 = 24.0;
/// Minimum size (px) for large text when bold.
pub const LARGE_BOLD_TEXT_PX: f64 = 18.66;
pub const DEFAULT_FONT_SIZE_PX: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTextStyle {
    pub foreground: Rgb,
    /// Always opaque.
    pub background: Rgb,
    pub font_size_px: f64,
    pub bold: bool,
}

impl ResolvedTextStyle {
    pub fn is_large_text(&self) -> bool {
        self.font_size_px >= LARGE_TEXT_PX || (self.bold && self.font_size_px >= LARGE_BOLD_TEXT_PX)
    }
}

/// Why a text node's colors could not be determined statically.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Unevaluable {
    #[error(transparent)]
    Color(#[from] ColorParseError),
    #[error("background image or gradient")]
    BackgroundImage,
    #[error("node is not a text node inside an element")]
    NotText,
}

/// Style declared directly on one element: class map first, inline `style` on top.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Declared {
    style: PartialStyle,
    background_image: bool,
}

fn declared_style(doc: &DomDocument, id: NodeId, map: &ClassStyleMap) -> Result<Declared, ColorParseError> {
    let node = doc.node(id);
    let mut out = Declared {
        style: node.attr("class").map(|c| map.style_for(c)).unwrap_or_default(),
        background_image: false,
    };
    if let Some(inline) = node.attr("style") {
        let (inline, image) = parse_inline_style(inline)?;
        out.style.overlay(&inline);
        out.background_image |= image;
    }
    Ok(out)
}

/// Parses the declarations this module cares about from a `style` attribute.
/// The flag reports a background image or gradient.
pub fn parse_inline_style(style: &str) -> Result<(PartialStyle, bool), ColorParseError> {
    let mut out = PartialStyle::default();
    let mut image = false;
    for decl in style.split(';') {
        let Some((prop, value)) = decl.split_once(':') else {
            continue;
        };
        let prop = prop.trim().to_ascii_lowercase();
        let value = value.trim();
        let value = value.strip_suffix("!important").map(str::trim_end).unwrap_or(value);
        let lower = value.to_ascii_lowercase();
        match prop.as_str() {
            "color" => out.color = Some(parse_color(value)?),
            "background-color" => out.background = Some(parse_color(value)?),
            "background" => {
                if lower.contains("url(") || lower.contains("gradient(") {
                    image = true;
                } else if let Ok(c) = parse_color(value) {
                    out.background = Some(c);
                } else {
                    let found = lower.split_ascii_whitespace().find_map(|t| parse_color(t).ok());
                    match found {
                        Some(c) => out.background = Some(c),
                        None if lower == "none" => {}
                        None => return Err(ColorParseError(value.to_string())),
                    }
                }
            }
            "background-image" if lower != "none" => image = true,
            "font-size" => out.font_size_px = parse_font_size(&lower).or(out.font_size_px),
            "font-weight" => out.font_weight = parse_font_weight(&lower).or(out.font_weight),
            _ => {}
        }
    }
    Ok((out, image))
}

/// `px`, `pt`, and `em`/`rem`/`%` relative to the 16px default.
fn parse_font_size(v: &str) -> Option<f64> {
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|x| *x > 0.0 && x.is_finite());
    if let Some(n) = v.strip_suffix("px") {
        num(n)
    } else if let Some(n) = v.strip_suffix("pt") {
        num(n).map(|x| x * 4.0 / 3.0)
    } else if let Some(n) = v.strip_suffix("rem").or_else(|| v.strip_suffix("em")) {
        num(n).map(|x| x * DEFAULT_FONT_SIZE_PX)
    } else if let Some(n) = v.strip_suffix('%') {
        num(n).map(|x| x / 100.0 * DEFAULT_FONT_SIZE_PX)
    } else {
        None
    }
}

fn parse_font_weight(v: &str) -> Option<u16> {
    match v {
        "bold" | "bolder" => Some(700),
        "normal" | "lighter" => Some(400),
        n => n.parse().ok(),
    }
}

fn is_bold_tag(tag: &str) -> bool {
    matches!(tag, "b" | "strong" | "h1" | "h2" | "h3")
}

/// Effective foreground, background and font metrics for a text node.
///
/// Foreground comes from the nearest ancestor declaring a color. Backgrounds
/// are collected from the innermost ancestor outward until one is opaque, then
/// composited over white. A translucent foreground is composited over the
/// resulting background.
pub fn resolve_text_style(
    doc: &DomDocument,
    node: NodeId,
    map: &ClassStyleMap,
) -> Result<ResolvedTextStyle, Unevaluable> {
    if !doc.node(node).is_text() || doc.element_ancestors(node).next().is_none() {
        return Err(Unevaluable::NotText);
    }
    let mut foreground = None;
    let mut backgrounds = Vec::new();
    let mut background_done = false;
    let mut font_size = None;
    let mut weight = None;
    let mut bold_tag = false;

    for el in doc.element_ancestors(node) {
        let declared = declared_style(doc, el, map)?;
        let s = declared.style;
        if foreground.is_none() {
            foreground = s.color;
        }
        if !background_done {
            if declared.background_image {
                return Err(Unevaluable::BackgroundImage);
            }
            if let Some(bg) = s.background {
                backgrounds.push(bg);
                background_done = bg.is_opaque();
            }
        }
        if font_size.is_none() {
            font_size = s.font_size_px;
        }
        if weight.is_none() {
            weight = s.font_weight;
        }
        bold_tag |= doc.node(el).tag().is_some_and(is_bold_tag);
    }

    let background = backgrounds.iter().rev().fold(Rgb::WHITE, |under, top| top.over(under));
    let foreground = match foreground.unwrap_or(Rgb::BLACK) {
        fg if fg.is_opaque() => fg,
        fg => fg.over(background),
    };
    Ok(ResolvedTextStyle {
        foreground,
        background,
        font_size_px: font_size.unwrap_or(DEFAULT_FONT_SIZE_PX),
        bold: bold_tag || weight.is_some_and(|w| w >= 700),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_html;

    fn first_text(doc: &DomDocument, needle: &str) -> NodeId {
        doc.ids()
            .find(|&id| doc.node(id).text() == Some(needle) && doc.node(id).is_text())
            .unwrap()
    }

    fn resolve(src: &str, text: &str, map: &ClassStyleMap) -> Result<ResolvedTextStyle, Unevaluable> {
        let doc = parse_html(src).unwrap();
        resolve_text_style(&doc, first_text(&doc, text), map)
    }

    #[test]
    fn inline_color_defaults_to_white_background() {
        let s = resolve(r#"<p style="color:#777">hi</p>"#, "hi", &ClassStyleMap::empty()).unwrap();
        assert_eq!(s.foreground, Rgb::new(0x77, 0x77, 0x77));
        assert_eq!(s.background, Rgb::WHITE);
        assert_eq!(s.font_size_px, 16.0);
        assert!(!s.bold);
    }

    #[test]
    fn class_map_lookup() {
        let mut map = ClassStyleMap::empty();
        map.insert(
            "bg-black",
            PartialStyle {
                background: Some(Rgb::BLACK),
                ..Default::default()
            },
        );
        map.insert(
            "text-white",
            PartialStyle {
                color: Some(Rgb::WHITE),
                ..Default::default()
            },
        );
        let s = resolve(
            r#"<div class="bg-black"><span class="text-white">x</span></div>"#,
            "x",
            &map,
        )
        .unwrap();
        assert_eq!((s.foreground, s.background), (Rgb::WHITE, Rgb::BLACK));
    }

    #[test]
    fn inline_beats_class_on_same_element() {
        let s = resolve(
            r#"<p class="text-white" style="color: #111111 !important">x</p>"#,
            "x",
            &ClassStyleMap::builtin(),
        )
        .unwrap();
        assert_eq!(s.foreground, Rgb::new(17, 17, 17));
    }

    #[test]
    fn translucent_background_composites_over_white() {
        let s = resolve(
            r#"<div style="background-color: rgba(0,0,0,0.5)"><p>x</p></div>"#,
            "x",
            &ClassStyleMap::empty(),
        )
        .unwrap();
        assert_eq!(s.background.channels(), [128, 128, 128]);
        assert!(s.background.is_opaque());
    }

    #[test]
    fn compositing_stops_at_opaque_ancestor() {
        let s = resolve(
            r#"<div style="background:#000"><div style="background:#ff0000"><div style="background-color:rgba(255,255,255,0.5)">x</div></div></div>"#,
            "x",
            &ClassStyleMap::empty(),
        )
        .unwrap();
        assert_eq!(s.background.channels(), [255, 128, 128]);
    }

    #[test]
    fn translucent_foreground_blends_into_background() {
        let s = resolve(
            r#"<p style="color: rgba(0,0,0,0.5)">x</p>"#,
            "x",
            &ClassStyleMap::empty(),
        )
        .unwrap();
        assert_eq!(s.foreground.channels(), [128, 128, 128]);
    }

    #[test]
    fn font_size_and_weight() {
        let map = ClassStyleMap::builtin();
        let s = resolve(r#"<div class="text-2xl"><span>x</span></div>"#, "x", &map).unwrap();
        assert!(s.is_large_text());
        let s = resolve(r#"<strong style="font-size: 14pt">x</strong>"#, "x", &map).unwrap();
        assert!(s.bold && (s.font_size_px - 18.6667).abs() < 1e-3 && s.is_large_text());
        let s = resolve(r#"<h2>x</h2>"#, "x", &map).unwrap();
        assert!(s.bold && !s.is_large_text());
        let s = resolve(r#"<p style="font-weight:700;font-size:1.5rem">x</p>"#, "x", &map).unwrap();
        assert!(s.bold && s.font_size_px == 24.0);
    }

    #[test]
    fn unevaluable_cases() {
        let map = ClassStyleMap::empty();
        assert!(matches!(
            resolve(r#"<p style="color: hsl(0, 0%, 50%)">x</p>"#, "x", &map),
            Err(Unevaluable::Color(_))
        ));
        assert_eq!(
            resolve(
                r#"<div style="background: linear-gradient(red, blue)"><p>x</p></div>"#,
                "x",
                &map
            ),
            Err(Unevaluable::BackgroundImage)
        );
        assert_eq!(resolve("x", "x", &map), Err(Unevaluable::NotText));
        // An image behind an opaque inner background does not matter.
        assert!(resolve(
            r#"<div style="background-image: url(a.png)"><p style="background:#fff">x</p></div>"#,
            "x",
            &map
        )
        .is_ok());
    }

    #[test]
    fn unrelated_siblings_do_not_affect_resolution() {
        let map = ClassStyleMap::builtin();
        let a = resolve(r#"<div class="bg-black"><p class="text-white">x</p></div>"#, "x", &map).unwrap();
        let b = resolve(
            r#"<div class="bg-black"><span style="color:red;background:blue">y</span><p class="text-white">x</p><i style="color:nope">z</i></div>"#,
            "x",
            &map,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
