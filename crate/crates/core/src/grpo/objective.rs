//! Group-relative clipped surrogate with a KL penalty to a frozen reference.
//!
//! With one token per slot decision (`|o_i| = T` slots), for a batch of groups:
//!
//! ```text
//! J(θ) = mean_groups (1/G) Σ_i (1/T) Σ_t min(ρ_it Â_i, clip(ρ_it, 1−ε, 1+ε) Â_i) − β Σ_slots KL(π_θ ‖ π_ref)
//! ρ_it = exp(log π_θ(c_it) − log π_old(c_it))
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::{softmax, TemplatePolicy};
use super::{GrpoConfig, GrpoError};
use crate::scalar::Real;

/// Below this population std a group carries no learning signal.
pub const ADVANTAGE_STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F> {
    pub prompt_id: String,
    pub choices: Vec<usize>,
    pub old_logprobs: Vec<F>,
    pub ref_logprobs: Vec<F>,
    /// `None` until the rendered page has been scored.
    pub reward: Option<F>,
}

/// `G` independent draws from `policy`, with token log-probs recorded under
/// both the sampling policy and the frozen reference.
pub fn sample_group<F: Real, R: Rng + ?Sized>(
    policy: &TemplatePolicy<F>,
    reference: &TemplatePolicy<F>,
    prompt_id: &str,
    group_size: usize,
    rng: &mut R,
) -> Result<Vec<Trajectory<F>>, GrpoError> {
    if group_size < 2 {
        return Err(GrpoError::Config(format!(
            "group size must be at least 2, got {group_size}"
        )));
    }
    if !policy.same_shape(reference) {
        return Err(GrpoError::Config(
            "policy and reference have different slot structures".into(),
        ));
    }
    let old: Vec<Vec<F>> = (0..policy.num_slots()).map(|j| policy.log_probs(j)).collect();
    let refp: Vec<Vec<F>> = (0..reference.num_slots()).map(|j| reference.log_probs(j)).collect();
    Ok((0..group_size)
        .map(|_| {
            let choices = policy.sample(rng);
            Trajectory {
                prompt_id: prompt_id.to_string(),
                old_logprobs: choices.iter().enumerate().map(|(j, &c)| old[j][c]).collect(),
                ref_logprobs: choices.iter().enumerate().map(|(j, &c)| refp[j][c]).collect(),
                choices,
                reward: None,
            }
        })
        .collect())
}

/// `(r − mean) / σ` with population σ; all zeros when σ is below the floor.
pub fn normalize_advantages<F: Real>(rewards: &[F]) -> Vec<F> {
    if rewards.is_empty() {
        return Vec::new();
    }
    let n = F::from_count(rewards.len() as u64);
    let mean = rewards.iter().fold(F::zero(), |a, &r| a + r) / n;
    let var = rewards.iter().fold(F::zero(), |a, &r| a + (r - mean) * (r - mean)) / n;
    let std = var.sqrt();
    if std < F::lit(ADVANTAGE_STD_FLOOR) {
        return vec![F::zero(); rewards.len()];
    }
    rewards.iter().map(|&r| (r - mean) / std).collect()
}

pub fn clip<F: Real>(x: F, lo: F, hi: F) -> F {
    x.max(lo).min(hi)
}

/// `min(ρ·Â, clip(ρ, 1−ε, 1+ε)·Â)`.
pub fn clipped_surrogate<F: Real>(ratio: F, advantage: F, epsilon: F) -> F {
    let unclipped = ratio * advantage;
    let clipped = clip(ratio, F::one() - epsilon, F::one() + epsilon) * advantage;
    unclipped.min(clipped)
}

/// Whether the clipped branch is strictly smaller, which zeroes the gradient.
fn clip_active<F: Real>(ratio: F, advantage: F, epsilon: F) -> bool {
    (advantage > F::zero() && ratio > F::one() + epsilon) || (advantage < F::zero() && ratio < F::one() - epsilon)
}

/// Exact `Σ_slots KL(π_θ ‖ π_ref)`.
pub fn kl_penalty<F: Real>(policy: &TemplatePolicy<F>, reference: &TemplatePolicy<F>) -> F {
    (0..policy.num_slots())
        .map(|j| slot_kl(policy, reference, j))
        .fold(F::zero(), |a, b| a + b)
}

fn slot_kl<F: Real>(policy: &TemplatePolicy<F>, reference: &TemplatePolicy<F>, j: usize) -> F {
    let p = softmax(&policy.logits()[j]);
    let lp = policy.log_probs(j);
    let lq = reference.log_probs(j);
    p.iter()
        .zip(lp.iter().zip(&lq))
        .filter(|(&pk, _)| pk > F::zero())
        .fold(F::zero(), |a, (&pk, (&lpk, &lqk))| a + pk * (lpk - lqk))
}

/// A batch of groups with their normalized advantages.
#[derive(Debug, Clone)]
pub struct ScoredBatch<'a, F> {
    pub groups: &'a [Vec<Trajectory<F>>],
    pub advantages: Vec<Vec<F>>,
}

impl<'a, F: Real> ScoredBatch<'a, F> {
    /// Checks every group has `group_size` scored trajectories of the right width.
    pub fn new(groups: &'a [Vec<Trajectory<F>>], group_size: usize, num_slots: usize) -> Result<Self, GrpoError> {
        if groups.is_empty() {
            return Err(GrpoError::Config("no groups to learn from".into()));
        }
        let mut advantages = Vec::with_capacity(groups.len());
        for g in groups {
            if g.len() != group_size {
                return Err(GrpoError::Config(format!(
                    "group has {} trajectories, config group_size is {group_size}",
                    g.len()
                )));
            }
            let mut rewards = Vec::with_capacity(g.len());
            for t in g {
                if t.choices.len() != num_slots
                    || t.old_logprobs.len() != num_slots
                    || t.ref_logprobs.len() != num_slots
                {
                    return Err(GrpoError::Config(format!(
                        "trajectory for {:?} does not match the {num_slots}-slot policy",
                        t.prompt_id
                    )));
                }
                rewards.push(
                    t.reward
                        .ok_or_else(|| GrpoError::Config(format!("trajectory for {:?} has no reward", t.prompt_id)))?,
                );
            }
            advantages.push(normalize_advantages(&rewards));
        }
        Ok(Self { groups, advantages })
    }
}

/// Objective value and its gradient with respect to every logit.
pub fn objective_and_gradient<F: Real>(
    policy: &TemplatePolicy<F>,
    reference: &TemplatePolicy<F>,
    batch: &ScoredBatch<'_, F>,
    epsilon: F,
    beta: F,
) -> (F, Vec<Vec<F>>) {
    let probs: Vec<Vec<F>> = (0..policy.num_slots()).map(|j| policy.probs(j)).collect();
    let logp: Vec<Vec<F>> = (0..policy.num_slots()).map(|j| policy.log_probs(j)).collect();
    let mut grad: Vec<Vec<F>> = probs.iter().map(|p| vec![F::zero(); p.len()]).collect();
    let mut surrogate = F::zero();
    let n_groups = F::from_count(batch.groups.len() as u64);

    for (group, advs) in batch.groups.iter().zip(&batch.advantages) {
        let g = F::from_count(group.len() as u64);
        for (traj, &adv) in group.iter().zip(advs) {
            let t_len = F::from_count(traj.choices.len() as u64);
            let w = F::one() / (n_groups * g * t_len);
            for (j, &c) in traj.choices.iter().enumerate() {
                let ratio = (logp[j][c] - traj.old_logprobs[j]).exp();
                surrogate = surrogate + w * clipped_surrogate(ratio, adv, epsilon);
                if !clip_active(ratio, adv, epsilon) {
                    // d ρ / d θ_jk = ρ (1[k = c] − p_k)
                    let scale = w * adv * ratio;
                    for (k, gk) in grad[j].iter_mut().enumerate() {
                        let indicator = if k == c { F::one() } else { F::zero() };
                        *gk = *gk + scale * (indicator - probs[j][k]);
                    }
                }
            }
        }
    }

    let mut kl = F::zero();
    for j in 0..policy.num_slots() {
        let kl_j = slot_kl(policy, reference, j);
        kl = kl + kl_j;
        let lq = reference.log_probs(j);
        // d KL_j / d θ_jk = p_k (log p_k − log q_k − KL_j)
        for (k, gk) in grad[j].iter_mut().enumerate() {
            *gk = *gk - beta * probs[j][k] * (logp[j][k] - lq[k] - kl_j);
        }
    }
    (surrogate - beta * kl, grad)
}

pub fn objective<F: Real>(
    policy: &TemplatePolicy<F>,
    reference: &TemplatePolicy<F>,
    batch: &ScoredBatch<'_, F>,
    epsilon: F,
    beta: F,
) -> F {
    objective_and_gradient(policy, reference, batch, epsilon, beta).0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OptimizerConfig {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::Adam {
            beta1: 0.9,
            beta2: 0.99,
            eps: 1e-8,
        }
    }
}

/// Learning-rate multiplier per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LrSchedule {
    Constant,
    /// Linear warmup over `ceil(warmup_ratio · steps)` steps, then cosine decay to zero.
    Cosine {
        warmup_ratio: f64,
    },
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule::Cosine { warmup_ratio: 0.01 }
    }
}

impl LrSchedule {
    /// Multiplier for 1-based `step` of `total`.
    pub fn factor(&self, step: usize, total: usize) -> f64 {
        match *self {
            LrSchedule::Constant => 1.0,
            LrSchedule::Cosine { warmup_ratio } => {
                let warmup = (warmup_ratio * total as f64).ceil() as usize;
                if step <= warmup {
                    return step as f64 / warmup as f64;
                }
                let decay = (total - warmup) as f64;
                let progress = (step - warmup - 1) as f64 / decay;
                0.5 * (1.0 + (std::f64::consts::PI * progress).cos())
            }
        }
    }
}

/// Gradient-ascent state over the policy logits.
#[derive(Debug, Clone)]
pub struct Optimizer<F> {
    config: OptimizerConfig,
    m: Vec<Vec<F>>,
    v: Vec<Vec<F>>,
    t: i32,
}

impl<F: Real> Optimizer<F> {
    pub fn new(config: OptimizerConfig, policy: &TemplatePolicy<F>) -> Self {
        let zeros: Vec<Vec<F>> = policy.logits().iter().map(|l| vec![F::zero(); l.len()]).collect();
        Self {
            config,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    /// `θ ← θ + lr · direction(∇J)`.
    pub fn ascend(&mut self, policy: &mut TemplatePolicy<F>, grad: &[Vec<F>], lr: F) {
        match self.config {
            OptimizerConfig::Sgd => {
                for (l, g) in policy.logits_mut().iter_mut().zip(grad) {
                    for (x, &gx) in l.iter_mut().zip(g) {
                        *x = *x + lr * gx;
                    }
                }
            }
            OptimizerConfig::Adam { beta1, beta2, eps } => {
                self.t += 1;
                let (b1, b2, eps) = (F::lit(beta1), F::lit(beta2), F::lit(eps));
                let c1 = F::one() - b1.powi(self.t);
                let c2 = F::one() - b2.powi(self.t);
                for (j, l) in policy.logits_mut().iter_mut().enumerate() {
                    for (k, x) in l.iter_mut().enumerate() {
                        let gx = grad[j][k];
                        let m = b1 * self.m[j][k] + (F::one() - b1) * gx;
                        let v = b2 * self.v[j][k] + (F::one() - b2) * gx * gx;
                        self.m[j][k] = m;
                        self.v[j][k] = v;
                        *x = *x + lr * (m / c1) / ((v / c2).sqrt() + eps);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats<F> {
    pub mean_reward: F,
    pub mean_advantage: F,
    /// After the update.
    pub kl: F,
    /// Before the update, at the sampling policy.
    pub objective: F,
}

/// One or more (`cfg.inner_epochs`) gradient-ascent steps on the groups.
/// The old-policy log-probs stay those recorded at sampling time.
pub fn grpo_step<F: Real>(
    policy: &mut TemplatePolicy<F>,
    reference: &TemplatePolicy<F>,
    groups: &[Vec<Trajectory<F>>],
    cfg: &GrpoConfig,
    optimizer: &mut Optimizer<F>,
    lr: F,
) -> Result<StepStats<F>, GrpoError> {
    cfg.validate()?;
    if !policy.same_shape(reference) {
        return Err(GrpoError::Config(
            "policy and reference have different slot structures".into(),
        ));
    }
    let batch = ScoredBatch::new(groups, cfg.group_size, policy.num_slots())?;
    let (eps, beta) = (F::lit(cfg.clip_epsilon), F::lit(cfg.kl_beta));
    let mut first_objective = None;
    for _ in 0..cfg.inner_epochs {
        let (j, grad) = objective_and_gradient(policy, reference, &batch, eps, beta);
        first_objective.get_or_insert(j);
        optimizer.ascend(policy, &grad, lr);
    }
    let n = F::from_count(groups.iter().map(Vec::len).sum::<usize>() as u64);
    let sum_rewards = groups
        .iter()
        .flatten()
        .fold(F::zero(), |a, t| a + t.reward.unwrap_or_else(F::zero));
    let sum_adv = batch.advantages.iter().flatten().fold(F::zero(), |a, &x| a + x);
    Ok(StepStats {
        mean_reward: sum_rewards / n,
        mean_advantage: sum_adv / n,
        kl: kl_penalty(policy, reference),
        objective: first_objective.unwrap_or_else(|| objective(policy, reference, &batch, eps, beta)),
    })
}
