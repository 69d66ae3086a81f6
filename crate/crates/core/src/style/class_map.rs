use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::color::{parse_color, ColorParseError, Rgb};

#[derive(Debug, thiserror::Error)]
pub enum ClassMapError {
    #[error("reading class map {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("class map is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("class token {0:?} is empty or contains whitespace")]
    BadToken(String),
    #[error("class {class:?}: {source}")]
    Color { class: String, source: ColorParseError },
    #[error("class {class:?}: font-size-px must be positive, got {value}")]
    FontSize { class: String, value: f64 },
    #[error("unsupported schema version {0}")]
    Schema(u64),
}

/// Style fragment contributed by one utility class (or one inline `style`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PartialStyle {
    pub color: Option<Rgb>,
    pub background: Option<Rgb>,
    pub font_size_px: Option<f64>,
    pub font_weight: Option<u16>,
}

impl PartialStyle {
    /// Fields set in `other` replace ours.
    pub fn overlay(&mut self, other: &PartialStyle) {
        self.color = other.color.or(self.color);
        self.background = other.background.or(self.background);
        self.font_size_px = other.font_size_px.or(self.font_size_px);
        self.font_weight = other.font_weight.or(self.font_weight);
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    color: Option<String>,
    #[serde(rename = "background-color")]
    background_color: Option<String>,
    #[serde(rename = "font-size-px")]
    font_size_px: Option<f64>,
    #[serde(rename = "font-weight")]
    font_weight: Option<u16>,
}

/// Static class → style table standing in for a utility-CSS framework.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassStyleMap {
    entries: BTreeMap<String, PartialStyle>,
}

const DEFAULT_MAP: &str = include_str!("../../data/default_class_map.json");

impl ClassStyleMap {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Text/background color scales, font sizes and font weights for the
    /// common utility classes (`text-gray-500`, `bg-white`, `text-2xl`, ...).
    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_MAP).expect("bundled class map is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassMapError> {
        let raw: BTreeMap<String, serde_json::Value> = serde_json::from_str(text)?;
        let mut entries = BTreeMap::new();
        for (class, value) in raw {
            if class == "schema" {
                match value.as_u64() {
                    Some(1) => continue,
                    other => return Err(ClassMapError::Schema(other.unwrap_or(0))),
                }
            }
            if class.is_empty() || class.chars().any(char::is_whitespace) {
                return Err(ClassMapError::BadToken(class));
            }
            let entry: RawEntry = serde_json::from_value(value)?;
            let color = |v: Option<String>| -> Result<Option<Rgb>, ClassMapError> {
                v.map(|s| parse_color(&s))
                    .transpose()
                    .map_err(|source| ClassMapError::Color {
                        class: class.clone(),
                        source,
                    })
            };
            if let Some(size) = entry.font_size_px.filter(|s| !(*s > 0.0 && s.is_finite())) {
                return Err(ClassMapError::FontSize { class, value: size });
            }
            let style = PartialStyle {
                color: color(entry.color)?,
                background: color(entry.background_color)?,
                font_size_px: entry.font_size_px,
                font_weight: entry.font_weight,
            };
            entries.insert(class, style);
        }
        Ok(Self { entries })
    }

    pub fn from_path(path: &Path) -> Result<Self, ClassMapError> {
        let text = std::fs::read_to_string(path).map_err(|source| ClassMapError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn get(&self, class: &str) -> Option<&PartialStyle> {
        self.entries.get(class)
    }

    pub fn insert(&mut self, class: &str, style: PartialStyle) {
        self.entries.insert(class.to_string(), style);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Combined style of a `class` attribute; later tokens win, unknown
    /// tokens contribute nothing.
    pub fn style_for(&self, class_attr: &str) -> PartialStyle {
        let mut out = PartialStyle::default();
        for token in class_attr.split_ascii_whitespace() {
            if let Some(s) = self.entries.get(token) {
                out.overlay(s);
            }
        }
        out
    }
}
