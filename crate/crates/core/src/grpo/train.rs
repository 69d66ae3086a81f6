//! Sample, render, audit, reward, normalize, step.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::objective::{grpo_step, sample_group, Optimizer, Trajectory};
use super::policy::TemplatePolicy;
use super::template::PageTemplate;
use super::{GrpoConfig, GrpoError};
use crate::dom::parse_html;
use crate::rules::{audit, default_catalog, Rule, SeverityCounts};
use crate::scalar::Real;
use crate::scoring::{self, RewardConfig};
use crate::style::ClassStyleMap;

/// One group per prompt per step; 16 groups of 6 gives 96 pages per step.
pub fn default_prompts() -> Vec<String> {
    (1..=16).map(|i| format!("prompt-{i:02}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRecord {
    pub step: usize,
    /// Mean reward of the pages sampled at this step, before the update.
    pub mean_reward: f64,
    /// After the update.
    pub kl: f64,
    /// Greedy decode of the updated policy.
    pub greedy_ir: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyAudit {
    pub choices: Vec<String>,
    pub counts: SeverityCounts,
    pub total_elements: u64,
    pub wvs: u64,
    pub inaccessibility_rate: f64,
    pub reward: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<F> {
    pub policy: TemplatePolicy<F>,
    pub reference: TemplatePolicy<F>,
    pub curve: Vec<TrainLogRecord>,
    pub initial: GreedyAudit,
    pub last: GreedyAudit,
}

#[derive(Clone, Copy)]
struct Audited {
    counts: SeverityCounts,
    total_elements: u64,
}

/// Renders and audits choice vectors, memoized since the space is small.
struct Environment {
    template: PageTemplate,
    class_map: ClassStyleMap,
    catalog: Vec<Rule>,
    cache: HashMap<Vec<usize>, Audited>,
}

impl Environment {
    fn new(template: PageTemplate) -> Self {
        Self {
            template,
            class_map: ClassStyleMap::builtin(),
            catalog: default_catalog(),
            cache: HashMap::new(),
        }
    }

    fn audit(&mut self, choices: &[usize]) -> Audited {
        if let Some(a) = self.cache.get(choices) {
            return *a;
        }
        let html = self.template.render(choices);
        // the renderer stays far below the parser's size limit
        let doc = parse_html(&html).expect("rendered page within size limit");
        let report = audit(&doc, &self.class_map, &self.catalog);
        let a = Audited {
            counts: report.counts,
            total_elements: report.total_elements,
        };
        self.cache.insert(choices.to_vec(), a);
        a
    }

    fn greedy(&mut self, choices: Vec<usize>) -> Result<GreedyAudit, GrpoError> {
        let a = self.audit(&choices);
        Ok(GreedyAudit {
            choices: choices
                .iter()
                .zip(self.template.slots())
                .map(|(&c, s)| s.choices()[c].label.clone())
                .collect(),
            counts: a.counts,
            total_elements: a.total_elements,
            wvs: scoring::wvs(&a.counts),
            inaccessibility_rate: scoring::inaccessibility_rate(&a.counts, a.total_elements)?,
            reward: scoring::reward(&a.counts, &RewardConfig::<f64>::default()),
        })
    }
}

/// Trains from a uniform policy; the uniform policy is also the frozen reference.
pub fn train<F: Real>(cfg: &GrpoConfig, prompts: &[String]) -> Result<TrainOutcome<F>, GrpoError> {
    cfg.validate()?;
    if prompts.is_empty() {
        return Err(GrpoError::Config("prompts: must not be empty".into()));
    }
    let mut env = Environment::new(cfg.page_template()?);
    let reference = TemplatePolicy::<F>::uniform(env.template.slots().to_vec());
    let mut policy = reference.clone();
    let mut optimizer = Optimizer::new(cfg.optimizer, &policy);
    let reward_cfg = RewardConfig::<F>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let initial = env.greedy(policy.greedy())?;
    let mut curve = Vec::with_capacity(cfg.steps);
    for step in 1..=cfg.steps {
        let mut groups: Vec<Vec<Trajectory<F>>> = Vec::with_capacity(prompts.len());
        for prompt in prompts {
            let mut group = sample_group(&policy, &reference, prompt, cfg.group_size, &mut rng)?;
            for t in &mut group {
                let a = env.audit(&t.choices);
                t.reward = Some(scoring::reward(&a.counts, &reward_cfg));
            }
            groups.push(group);
        }
        let lr = F::lit(cfg.learning_rate * cfg.lr_schedule.factor(step, cfg.steps));
        let stats = grpo_step(&mut policy, &reference, &groups, cfg, &mut optimizer, lr)?;
        let g = env.greedy(policy.greedy())?;
        curve.push(TrainLogRecord {
            step,
            mean_reward: stats.mean_reward.to_f64().unwrap_or(f64::NAN),
            kl: stats.kl.to_f64().unwrap_or(f64::NAN),
            greedy_ir: g.inaccessibility_rate,
        });
    }
    let last = env.greedy(policy.greedy())?;
    Ok(TrainOutcome {
        policy,
        reference,
        curve,
        initial,
        last,
    })
}

/// Trailing-window means; entry `i` averages `values[i..i + window]`.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || values.len() < window {
        return Vec::new();
    }
    values
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}
