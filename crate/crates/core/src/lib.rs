//! Static HTML accessibility auditing, severity-weighted rewards, and a small
//! GRPO trainer whose policy learns to emit accessible pages.
//!
//! Numeric code is generic over [`scalar::Scalar`] / [`scalar::Real`]; the
//! aliases below fix the common choices.

pub mod dom;
pub mod grpo;
pub mod harness;
pub mod rules;
pub mod scalar;
pub mod scoring;
pub mod style;

use num_rational::Rational64;

pub use dom::{parse_html, DomDocument, NodeId};
pub use rules::{audit, default_catalog, AuditReport, Severity, SeverityCounts};
pub use style::ClassStyleMap;

pub type RewardConfigF64 = scoring::RewardConfig<f64>;
pub type RewardConfigF32 = scoring::RewardConfig<f32>;
/// Exact tenths, so penalties such as `3 × 0.1` compare equal to `0.3`.
pub type ExactRewardConfig = scoring::RewardConfig<Rational64>;
pub type ScoreF64 = scoring::ScoreBreakdown<f64>;
pub type ExactScore = scoring::ScoreBreakdown<Rational64>;

pub type PolicyF64 = grpo::TemplatePolicy<f64>;
pub type PolicyF32 = grpo::TemplatePolicy<f32>;
pub type TrajectoryF64 = grpo::Trajectory<f64>;
pub type TrajectoryF32 = grpo::Trajectory<f32>;
