use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::tokens::{Side, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Forced,
    Generated,
}

/// A target sentence with per-token model scores and where each token came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub tokens: TokenSeq,
    /// Natural-log probabilities, one per token, all `<= 0`.
    pub token_logprobs: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

impl Hypothesis {
    pub fn empty() -> Self {
        Self {
            tokens: TokenSeq::empty(Side::Target),
            token_logprobs: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn log_prob(&self) -> f64 {
        self.token_logprobs.iter().sum()
    }

    pub fn forced_count(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| **p == Provenance::Forced)
            .count()
    }
}

/// Counts of user actions. Serialized with the short keys used in logs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EffortTally {
    #[serde(rename = "ws")]
    pub word_strokes: u64,
    #[serde(rename = "ks")]
    pub key_strokes: u64,
    #[serde(rename = "ma")]
    pub mouse_actions: u64,
}

impl EffortTally {
    pub const fn new(word_strokes: u64, key_strokes: u64, mouse_actions: u64) -> Self {
        Self {
            word_strokes,
            key_strokes,
            mouse_actions,
        }
    }

    pub const fn mouse(mouse_actions: u64) -> Self {
        Self::new(0, 0, mouse_actions)
    }
}

impl Add for EffortTally {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            word_strokes: self.word_strokes + rhs.word_strokes,
            key_strokes: self.key_strokes + rhs.key_strokes,
            mouse_actions: self.mouse_actions + rhs.mouse_actions,
        }
    }
}

impl AddAssign for EffortTally {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sum for EffortTally {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}
