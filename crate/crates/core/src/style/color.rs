//! sRGB colors, CSS color parsing, and WCAG luminance/contrast math.

use crate::scalar::Real;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("unrecognized color `{0}`")]
pub struct ColorParseError(pub String);

/// 8-bit sRGB color with straight alpha in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rgb {
    r: u8,
    g: u8,
    b: u8,
    alpha: f64,
}

impl Rgb {
    pub const WHITE: Rgb = Rgb::new(255, 255, 255);
    pub const BLACK: Rgb = Rgb::new(0, 0, 0);
    pub const TRANSPARENT: Rgb = Rgb {
        r: 0,
        g: 0,
        b: 0,
        alpha: 0.0,
    };

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b, alpha: 1.0 }
    }

    /// Returns `None` when `alpha` is outside `[0, 1]` or NaN.
    pub fn with_alpha(r: u8, g: u8, b: u8, alpha: f64) -> Option<Self> {
        (0.0..=1.0).contains(&alpha).then_some(Self { r, g, b, alpha })
    }

    pub fn r(&self) -> u8 {
        self.r
    }
    pub fn g(&self) -> u8 {
        self.g
    }
    pub fn b(&self) -> u8 {
        self.b
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn channels(&self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    pub fn is_opaque(&self) -> bool {
        self.alpha >= 1.0
    }

    /// Source-over compositing: `a * top + (1 - a) * bottom` per channel,
    /// rounded half up. The result takes the bottom's alpha combined with ours.
    pub fn over(self, bottom: Rgb) -> Rgb {
        let a = self.alpha;
        let mix = |top: u8, under: u8| -> u8 {
            let v = a * f64::from(top) + (1.0 - a) * f64::from(under);
            (v + 0.5).floor().clamp(0.0, 255.0) as u8
        };
        Rgb {
            r: mix(self.r, bottom.r),
            g: mix(self.g, bottom.g),
            b: mix(self.b, bottom.b),
            alpha: a + bottom.alpha * (1.0 - a),
        }
    }
}

const NAMED: &[(&str, Rgb)] = &[
    ("black", Rgb::new(0, 0, 0)),
    ("white", Rgb::new(255, 255, 255)),
    ("red", Rgb::new(255, 0, 0)),
    ("green", Rgb::new(0, 128, 0)),
    ("lime", Rgb::new(0, 255, 0)),
    ("blue", Rgb::new(0, 0, 255)),
    ("yellow", Rgb::new(255, 255, 0)),
    ("orange", Rgb::new(255, 165, 0)),
    ("purple", Rgb::new(128, 0, 128)),
    ("gray", Rgb::new(128, 128, 128)),
    ("grey", Rgb::new(128, 128, 128)),
    ("silver", Rgb::new(192, 192, 192)),
    ("maroon", Rgb::new(128, 0, 0)),
    ("navy", Rgb::new(0, 0, 128)),
    ("teal", Rgb::new(0, 128, 128)),
    ("olive", Rgb::new(128, 128, 0)),
    ("aqua", Rgb::new(0, 255, 255)),
    ("cyan", Rgb::new(0, 255, 255)),
    ("fuchsia", Rgb::new(255, 0, 255)),
    ("magenta", Rgb::new(255, 0, 255)),
    ("pink", Rgb::new(255, 192, 203)),
    ("brown", Rgb::new(165, 42, 42)),
    ("transparent", Rgb::TRANSPARENT),
];

/// Parses `#rgb`, `#rgba`, `#rrggbb`, `#rrggbbaa`, `rgb()`/`rgba()` (comma or
/// space separated, numbers or percentages) and the named colors above.
/// Out-of-range channel values are clamped as CSS does.
pub fn parse_color(text: &str) -> Result<Rgb, ColorParseError> {
    let err = || ColorParseError(text.to_string());
    let s = text.trim().to_ascii_lowercase();
    if let Some(hex) = s.strip_prefix('#') {
        return parse_hex(hex).ok_or_else(err);
    }
    if let Some(args) = s
        .strip_prefix("rgba(")
        .or_else(|| s.strip_prefix("rgb("))
        .and_then(|r| r.strip_suffix(')'))
    {
        return parse_rgb_args(args).ok_or_else(err);
    }
    NAMED
        .iter()
        .find(|(name, _)| *name == s)
        .map(|(_, c)| *c)
        .ok_or_else(err)
}

fn parse_hex(hex: &str) -> Option<Rgb> {
    if !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    let nibble = |i: usize| u8::from_str_radix(&hex[i..i + 1], 16).ok().map(|v| v * 17);
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
    let (r, g, b, a) = match hex.len() {
        3 => (nibble(0)?, nibble(1)?, nibble(2)?, 255),
        4 => (nibble(0)?, nibble(1)?, nibble(2)?, nibble(3)?),
        6 => (byte(0)?, byte(2)?, byte(4)?, 255),
        8 => (byte(0)?, byte(2)?, byte(4)?, byte(6)?),
        _ => return None,
    };
    Rgb::with_alpha(r, g, b, f64::from(a) / 255.0)
}

fn parse_rgb_args(args: &str) -> Option<Rgb> {
    let parts: Vec<&str> = if args.contains(',') {
        args.split(',').map(str::trim).collect()
    } else {
        let (rgb, alpha) = match args.split_once('/') {
            Some((rgb, a)) => (rgb, Some(a.trim())),
            None => (args, None),
        };
        rgb.split_ascii_whitespace().chain(alpha).collect()
    };
    if !(3..=4).contains(&parts.len()) {
        return None;
    }
    let channel = |p: &str| -> Option<u8> {
        let v = match p.strip_suffix('%') {
            Some(pct) => pct.trim().parse::<f64>().ok()? * 2.55,
            None => p.parse::<f64>().ok()?,
        };
        v.is_finite().then(|| v.round().clamp(0.0, 255.0) as u8)
    };
    let alpha = match parts.get(3) {
        None => 1.0,
        Some(p) => {
            let v = match p.strip_suffix('%') {
                Some(pct) => pct.trim().parse::<f64>().ok()? / 100.0,
                None => p.parse::<f64>().ok()?,
            };
            if !v.is_finite() {
                return None;
            }
            v.clamp(0.0, 1.0)
        }
    };
    Rgb::with_alpha(channel(parts[0])?, channel(parts[1])?, channel(parts[2])?, alpha)
}

fn linearize<F: Real>(channel: u8) -> F {
    let v = F::from_u8(channel).unwrap() / F::lit(255.0);
    if v <= F::lit(0.04045) {
        v / F::lit(12.92)
    } else {
        ((v + F::lit(0.055)) / F::lit(1.055)).powf(F::lit(2.4))
    }
}

/// WCAG 2.x relative luminance of an opaque color. Alpha is ignored.
pub fn relative_luminance<F: Real>(c: Rgb) -> F {
    F::lit(0.2126) * linearize::<F>(c.r) + F::lit(0.7152) * linearize::<F>(c.g) + F::lit(0.0722) * linearize::<F>(c.b)
}

/// `(L_lighter + 0.05) / (L_darker + 0.05)`, in `[1, 21]`.
pub fn contrast_ratio<F: Real>(a: Rgb, b: Rgb) -> F {
    let la = relative_luminance::<F>(a);
    let lb = relative_luminance::<F>(b);
    let (hi, lo) = if la >= lb { (la, lb) } else { (lb, la) };
    (hi + F::lit(0.05)) / (lo + F::lit(0.05))
}
