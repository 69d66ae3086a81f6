//! Group-relative policy optimization over a tabular page-template policy.
//!
//! Each slot decision is one token; a sampled choice vector renders to a page
//! whose audit determines the reward.

mod objective;
mod policy;
mod template;
mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scoring::ScoreError;

pub use objective::{
    clip, clipped_surrogate, grpo_step, kl_penalty, normalize_advantages, objective, objective_and_gradient,
    sample_group, LrSchedule, Optimizer, OptimizerConfig, ScoredBatch, StepStats, Trajectory, ADVANTAGE_STD_FLOOR,
};
pub use policy::{log_softmax, softmax, Choice, DecisionSlot, TemplatePolicy};
pub use template::{default_slots, default_template, PageTemplate, DEFAULT_TEMPLATE};
pub use train::{default_prompts, moving_average, train, GreedyAudit, TrainLogRecord, TrainOutcome};

pub const TRAIN_SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GrpoError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("invalid page template: {0}")]
    Template(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrpoConfig {
    pub schema: u32,
    pub group_size: usize,
    pub clip_epsilon: f64,
    pub kl_beta: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub seed: u64,
    /// Gradient steps per sampled batch; ratios equal 1 on the first.
    pub inner_epochs: usize,
    pub optimizer: OptimizerConfig,
    pub lr_schedule: LrSchedule,
    /// Prompt ids sampled each step, one group per prompt. Defaults to
    /// [`default_prompts`] when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompts: Option<Vec<String>>,
    /// Replaces the default slot list; slot names must match the template.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slots: Option<Vec<DecisionSlot>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
}

impl Default for GrpoConfig {
    fn default() -> Self {
        Self {
            schema: TRAIN_SCHEMA,
            group_size: 6,
            clip_epsilon: 0.2,
            kl_beta: 0.001,
            learning_rate: 1.0,
            steps: 300,
            seed: 3407,
            inner_epochs: 1,
            optimizer: OptimizerConfig::default(),
            lr_schedule: LrSchedule::default(),
            prompts: None,
            slots: None,
            template: None,
        }
    }
}

impl GrpoConfig {
    pub fn from_json(text: &str) -> Result<Self, GrpoError> {
        let cfg: GrpoConfig = serde_json::from_str(text).map_err(|e| GrpoError::Config(e.to_string()))?;
        cfg.validate()?;
        cfg.page_template()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, GrpoError> {
        let text = std::fs::read_to_string(path).map_err(|e| GrpoError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), GrpoError> {
        let bad = |field: &str, why: &str| Err(GrpoError::Config(format!("{field}: {why}")));
        if self.schema != TRAIN_SCHEMA {
            return bad("schema", &format!("unsupported version {}", self.schema));
        }
        if self.group_size < 2 {
            return bad("group_size", "must be at least 2");
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return bad("clip_epsilon", "must lie in (0, 1)");
        }
        if !(self.kl_beta >= 0.0 && self.kl_beta.is_finite()) {
            return bad("kl_beta", "must be finite and nonnegative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", "must be finite and positive");
        }
        if self.inner_epochs == 0 {
            return bad("inner_epochs", "must be at least 1");
        }
        if let OptimizerConfig::Adam { beta1, beta2, eps } = self.optimizer {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
                return bad("optimizer", "beta1 and beta2 must lie in [0, 1)");
            }
            if eps.is_nan() || eps <= 0.0 {
                return bad("optimizer", "eps must be positive");
            }
        }
        if let LrSchedule::Cosine { warmup_ratio } = self.lr_schedule {
            if !(0.0..1.0).contains(&warmup_ratio) {
                return bad("lr_schedule", "warmup_ratio must lie in [0, 1)");
            }
        }
        if let Some(p) = &self.prompts {
            if p.is_empty() {
                return bad("prompts", "must not be empty");
            }
        }
        Ok(())
    }

    /// The default page unless `slots` and/or `template` override it.
    pub fn page_template(&self) -> Result<PageTemplate, GrpoError> {
        let slots = self.slots.clone().unwrap_or_else(default_slots);
        let source = self.template.as_deref().unwrap_or(DEFAULT_TEMPLATE);
        PageTemplate::new(source, slots)
    }

    pub fn prompt_ids(&self) -> Vec<String> {
        self.prompts.clone().unwrap_or_else(default_prompts)
    }
}
