use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GrpoError;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Choice {
    pub label: String,
    pub fragment: String,
}

impl Choice {
    pub fn new(label: impl Into<String>, fragment: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            fragment: fragment.into(),
        }
    }
}

/// One categorical decision; choices are fixed once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSlot", into = "RawSlot")]
pub struct DecisionSlot {
    name: String,
    choices: Vec<Choice>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlot {
    name: String,
    choices: Vec<Choice>,
}

impl TryFrom<RawSlot> for DecisionSlot {
    type Error = GrpoError;
    fn try_from(raw: RawSlot) -> Result<Self, GrpoError> {
        DecisionSlot::new(raw.name, raw.choices)
    }
}

impl From<DecisionSlot> for RawSlot {
    fn from(s: DecisionSlot) -> Self {
        RawSlot {
            name: s.name,
            choices: s.choices,
        }
    }
}

impl DecisionSlot {
    pub fn new(name: impl Into<String>, choices: Vec<Choice>) -> Result<Self, GrpoError> {
        let name = name.into();
        let valid_name = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid_name {
            return Err(GrpoError::Config(format!(
                "slot name {name:?} must be nonempty [A-Za-z0-9_-]"
            )));
        }
        if choices.len() < 2 {
            return Err(GrpoError::Config(format!("slot {name:?} needs at least 2 choices")));
        }
        for (i, c) in choices.iter().enumerate() {
            if choices[..i].iter().any(|o| o.label == c.label) {
                return Err(GrpoError::Config(format!("slot {name:?} repeats choice {:?}", c.label)));
            }
        }
        Ok(Self { name, choices })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn choices(&self) -> &[Choice] {
        &self.choices
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.choices.iter().position(|c| c.label == label)
    }
}

/// Independent softmax over each slot's choices.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplatePolicy<F> {
    slots: Vec<DecisionSlot>,
    logits: Vec<Vec<F>>,
}

impl<F: Real> TemplatePolicy<F> {
    pub fn uniform(slots: Vec<DecisionSlot>) -> Self {
        let logits = slots.iter().map(|s| vec![F::zero(); s.len()]).collect();
        Self { slots, logits }
    }

    pub fn with_logits(slots: Vec<DecisionSlot>, logits: Vec<Vec<F>>) -> Result<Self, GrpoError> {
        if logits.len() != slots.len() {
            return Err(GrpoError::Config(format!(
                "{} logit vectors for {} slots",
                logits.len(),
                slots.len()
            )));
        }
        for (s, l) in slots.iter().zip(&logits) {
            if l.len() != s.len() {
                return Err(GrpoError::Config(format!(
                    "slot {:?} has {} choices but {} logits",
                    s.name(),
                    s.len(),
                    l.len()
                )));
            }
            if l.iter().any(|x| !x.is_finite()) {
                return Err(GrpoError::Config(format!("slot {:?} has non-finite logits", s.name())));
            }
        }
        Ok(Self { slots, logits })
    }

    pub fn slots(&self) -> &[DecisionSlot] {
        &self.slots
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn logits(&self) -> &[Vec<F>] {
        &self.logits
    }

    pub(crate) fn logits_mut(&mut self) -> &mut [Vec<F>] {
        &mut self.logits
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.logits.len() == other.logits.len()
            && self.logits.iter().zip(&other.logits).all(|(a, b)| a.len() == b.len())
    }

    pub fn probs(&self, slot: usize) -> Vec<F> {
        softmax(&self.logits[slot])
    }

    pub fn log_probs(&self, slot: usize) -> Vec<F> {
        log_softmax(&self.logits[slot])
    }

    pub fn log_prob(&self, slot: usize, choice: usize) -> F {
        self.log_probs(slot)[choice]
    }

    /// Sum of per-slot log-probabilities of a full choice vector.
    pub fn sequence_log_prob(&self, choices: &[usize]) -> F {
        choices
            .iter()
            .enumerate()
            .fold(F::zero(), |acc, (j, &c)| acc + self.log_prob(j, c))
    }

    /// Highest-probability choice per slot, lowest index on ties.
    pub fn greedy(&self) -> Vec<usize> {
        self.logits
            .iter()
            .map(|l| {
                l.iter()
                    .enumerate()
                    .fold(0, |best, (i, &x)| if x > l[best] { i } else { best })
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        (0..self.num_slots())
            .map(|j| sample_index(&self.probs(j), rng))
            .collect()
    }

    pub fn validate_choices(&self, choices: &[usize]) -> Result<(), GrpoError> {
        if choices.len() != self.num_slots() {
            return Err(GrpoError::Config(format!(
                "{} choices for {} slots",
                choices.len(),
                self.num_slots()
            )));
        }
        match choices.iter().zip(&self.slots).find(|(&c, s)| c >= s.len()) {
            Some((&c, s)) => Err(GrpoError::Config(format!(
                "choice {c} out of range for slot {:?}",
                s.name()
            ))),
            None => Ok(()),
        }
    }

    /// Largest per-slot total-variation distance to `other`.
    pub fn max_total_variation(&self, other: &Self) -> F {
        (0..self.num_slots())
            .map(|j| {
                let half = F::lit(0.5);
                self.probs(j)
                    .iter()
                    .zip(other.probs(j))
                    .fold(F::zero(), |acc, (&p, q)| acc + (p - q).abs())
                    * half
            })
            .fold(F::zero(), F::max)
    }
}

pub fn softmax<F: Real>(logits: &[F]) -> Vec<F> {
    let m = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let exps: Vec<F> = logits.iter().map(|&x| (x - m).exp()).collect();
    let z = exps.iter().copied().fold(F::zero(), |a, b| a + b);
    exps.into_iter().map(|e| e / z).collect()
}

pub fn log_softmax<F: Real>(logits: &[F]) -> Vec<F> {
    let m = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let lse = logits.iter().fold(F::zero(), |a, &x| a + (x - m).exp()).ln() + m;
    logits.iter().map(|&x| x - lse).collect()
}

fn sample_index<F: Real, R: Rng + ?Sized>(probs: &[F], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p.to_f64().unwrap_or(0.0);
        if u < acc {
            return i;
        }
    }
    // rounding left the cumulative sum just under 1
    probs.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn slot(name: &str, n: usize) -> DecisionSlot {
        DecisionSlot::new(
            name,
            (0..n)
                .map(|i| Choice::new(format!("c{i}"), format!("<i>{i}</i>")))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn slot_validation() {
        assert!(DecisionSlot::new("x", vec![Choice::new("a", "")]).is_err());
        assert!(DecisionSlot::new("x", vec![Choice::new("a", ""), Choice::new("a", "b")]).is_err());
        assert!(DecisionSlot::new("bad name", vec![Choice::new("a", ""), Choice::new("b", "")]).is_err());
        let json = r#"{"name":"x","choices":[{"label":"a","fragment":""}]}"#;
        assert!(serde_json::from_str::<DecisionSlot>(json).is_err());
    }

    #[test]
    fn saturated_slot_always_picks_first() {
        let p = TemplatePolicy::with_logits(vec![slot("s", 2)], vec![vec![20.0, -20.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3407);
        for _ in 0..6 {
            assert_eq!(p.sample(&mut rng), [0]);
        }
    }

    #[test]
    fn uniform_slot_frequency() {
        let p = TemplatePolicy::<f64>::uniform(vec![slot("s", 2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3407);
        let n = 10_000;
        let zeros = (0..n).filter(|_| p.sample(&mut rng)[0] == 0).count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.02, "{freq}");
    }

    #[test]
    fn greedy_breaks_ties_low() {
        let p = TemplatePolicy::<f64>::uniform(vec![slot("a", 3), slot("b", 2)]);
        assert_eq!(p.greedy(), [0, 0]);
        let p = TemplatePolicy::with_logits(vec![slot("a", 3)], vec![vec![0.0, 1.0, 1.0]]).unwrap();
        assert_eq!(p.greedy(), [1]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(TemplatePolicy::with_logits(vec![slot("a", 3)], vec![vec![0.0, 1.0]]).is_err());
        assert!(TemplatePolicy::<f64>::with_logits(vec![slot("a", 2)], vec![]).is_err());
        assert!(TemplatePolicy::with_logits(vec![slot("a", 2)], vec![vec![0.0, f64::NAN]]).is_err());
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one(logits in prop::collection::vec(-50.0f64..50.0, 2..8)) {
            let p = softmax(&logits);
            let s: f64 = p.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            let lp = log_softmax(&logits);
            for (a, b) in p.iter().zip(lp) {
                prop_assert!((a.ln() - b).abs() < 1e-9 || *a < 1e-300);
            }
        }

        #[test]
        fn softmax_f32_sums_to_one(logits in prop::collection::vec(-20.0f32..20.0, 2..8)) {
            let s: f32 = softmax(&logits).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-5);
        }
    }
}
