//! Severity-weighted training reward and evaluation metrics.
//!
//! ```text
//! penalty = Σ_v N_v · w_v            w = (0.1, 0.2, 0.3, 0.4)
//! reward  = max(floor, B − penalty)  B = 2.0, floor = 0
//! WVS     = Σ_v λ_v · N_v            λ = (1, 2, 3, 4)
//! IR      = WVS / total elements
//! ```
//!
//! Everything is generic over [`Scalar`]; use [`num_rational::Rational64`] for
//! exact results or `f64` for speed.

use std::path::Path;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::rules::{AuditReport, ReportFile, Severity, SeverityCounts};
use crate::scalar::Scalar;

pub const SCORE_SCHEMA: u32 = 1;

/// Integer WVS weights, indexed by [`Severity::index`].
pub const WVS_WEIGHTS: [u64; 4] = [1, 2, 3, 4];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScoreError {
    #[error("document has {wvs} weighted violations but no elements to normalize by")]
    DegenerateDocument { wvs: u64 },
    #[error("invalid reward config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardConfig<S> {
    weights: [S; 4],
    base: S,
    floor: S,
}

impl<S: Scalar> Default for RewardConfig<S> {
    fn default() -> Self {
        Self {
            weights: [1, 2, 3, 4].map(|tenths| S::ratio(tenths, 10)),
            base: S::from_count(2),
            floor: S::zero(),
        }
    }
}

impl<S: Scalar> RewardConfig<S> {
    /// Weights must strictly increase with severity, `base` must be positive
    /// and `floor` must not exceed `base`.
    pub fn new(weights: [S; 4], base: S, floor: S) -> Result<Self, ScoreError> {
        if weights.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScoreError::Config(
                "weights must strictly increase from minor to critical".into(),
            ));
        }
        if weights[0] < S::zero() {
            return Err(ScoreError::Config("weights must be nonnegative".into()));
        }
        if base <= S::zero() {
            return Err(ScoreError::Config("base must be positive".into()));
        }
        if floor > base {
            return Err(ScoreError::Config("floor must not exceed base".into()));
        }
        Ok(Self { weights, base, floor })
    }

    pub fn weight(&self, v: Severity) -> &S {
        &self.weights[v.index()]
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn floor(&self) -> &S {
        &self.floor
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RewardConfigFile {
    schema: Option<u32>,
    weights: Option<WeightsFile>,
    base: Option<f64>,
    floor: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    minor: f64,
    moderate: f64,
    serious: f64,
    critical: f64,
}

impl RewardConfig<f64> {
    /// `{"schema": 1, "weights": {"minor": .., ..}, "base": .., "floor": ..}`;
    /// omitted fields keep their defaults.
    pub fn from_json(text: &str) -> Result<Self, ScoreError> {
        let raw: RewardConfigFile = serde_json::from_str(text).map_err(|e| ScoreError::Config(e.to_string()))?;
        if let Some(s) = raw.schema.filter(|&s| s != SCORE_SCHEMA) {
            return Err(ScoreError::Config(format!("unsupported schema {s}")));
        }
        let d = Self::default();
        let weights = raw
            .weights
            .map(|w| [w.minor, w.moderate, w.serious, w.critical])
            .unwrap_or(d.weights);
        if weights
            .iter()
            .chain(&raw.base)
            .chain(&raw.floor)
            .any(|x| !x.is_finite())
        {
            return Err(ScoreError::Config("values must be finite".into()));
        }
        Self::new(weights, raw.base.unwrap_or(d.base), raw.floor.unwrap_or(d.floor))
    }

    /// Simplest nearby rationals (0.1 becomes 1/10), so decimal weights can be
    /// scored without binary rounding. `None` if a value does not fit.
    pub fn to_exact(&self) -> Option<RewardConfig<Rational64>> {
        let q = |x: f64| Rational64::approximate_float(x);
        let w = &self.weights;
        Some(RewardConfig {
            weights: [q(w[0])?, q(w[1])?, q(w[2])?, q(w[3])?],
            base: q(self.base)?,
            floor: q(self.floor)?,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, ScoreError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScoreError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Anything carrying per-severity counts and an element total.
pub trait Audited {
    fn counts(&self) -> SeverityCounts;
    fn total_elements(&self) -> u64;
}

impl Audited for AuditReport {
    fn counts(&self) -> SeverityCounts {
        self.counts
    }
    fn total_elements(&self) -> u64 {
        self.total_elements
    }
}

impl Audited for ReportFile {
    fn counts(&self) -> SeverityCounts {
        self.counts
    }
    fn total_elements(&self) -> u64 {
        self.total_elements
    }
}

/// `Σ N_v · w_v` over the severities present.
pub fn penalty<S: Scalar>(counts: &SeverityCounts, cfg: &RewardConfig<S>) -> S {
    counts.present().into_iter().fold(S::zero(), |acc, v| {
        acc + S::from_count(counts.get(v)) * cfg.weight(v).clone()
    })
}

/// `max(floor, B − penalty)`; exactly `B` for a clean report.
pub fn reward<S: Scalar>(counts: &SeverityCounts, cfg: &RewardConfig<S>) -> S {
    (cfg.base.clone() - penalty(counts, cfg)).max_of(cfg.floor.clone())
}

pub fn wvs(counts: &SeverityCounts) -> u64 {
    Severity::ALL
        .iter()
        .map(|&v| WVS_WEIGHTS[v.index()] * counts.get(v))
        .sum()
}

/// `WVS / total_elements`, zero for a clean empty document.
pub fn inaccessibility_rate<S: Scalar>(counts: &SeverityCounts, total_elements: u64) -> Result<S, ScoreError> {
    let w = wvs(counts);
    match (w, total_elements) {
        (0, _) => Ok(S::zero()),
        (w, 0) => Err(ScoreError::DegenerateDocument { wvs: w }),
        (w, n) => Ok(S::from_count(w) / S::from_count(n)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBreakdown<S> {
    pub penalty: S,
    pub reward: S,
    pub wvs: u64,
    pub inaccessibility_rate: S,
}

pub fn score<S: Scalar>(report: &impl Audited, cfg: &RewardConfig<S>) -> Result<ScoreBreakdown<S>, ScoreError> {
    let counts = report.counts();
    Ok(ScoreBreakdown {
        penalty: penalty(&counts, cfg),
        reward: reward(&counts, cfg),
        wvs: wvs(&counts),
        inaccessibility_rate: inaccessibility_rate(&counts, report.total_elements())?,
    })
}

/// [`score`] in rational arithmetic, rounded to `f64` once at the end;
/// falls back to `f64` arithmetic if the config has no rational form.
pub fn score_rounded(report: &impl Audited, cfg: &RewardConfig<f64>) -> Result<ScoreBreakdown<f64>, ScoreError> {
    let Some(exact) = cfg.to_exact() else {
        return score(report, cfg);
    };
    let s = score(report, &exact)?;
    let f = |x: Rational64| x.to_f64().unwrap_or(f64::NAN);
    Ok(ScoreBreakdown {
        penalty: f(s.penalty),
        reward: f(s.reward),
        wvs: s.wvs,
        inaccessibility_rate: f(s.inaccessibility_rate),
    })
}

/// Score file: `{"schema":1,"penalty":x,"reward":x,"wvs":n,"inaccessibility_rate":x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreFile {
    pub schema: u32,
    pub penalty: f64,
    pub reward: f64,
    pub wvs: u64,
    pub inaccessibility_rate: f64,
}

impl<S: Scalar> From<&ScoreBreakdown<S>> for ScoreFile {
    fn from(s: &ScoreBreakdown<S>) -> Self {
        let f = |x: &S| x.to_f64().unwrap_or(f64::NAN);
        Self {
            schema: SCORE_SCHEMA,
            penalty: f(&s.penalty),
            reward: f(&s.reward),
            wvs: s.wvs,
            inaccessibility_rate: f(&s.inaccessibility_rate),
        }
    }
}
