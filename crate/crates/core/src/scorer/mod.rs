//! Next-token probability models consumed by the decoder.
//!
//! A [`Scorer`] maps a source sentence and a target prefix to a log-probability
//! for every entry of its fixed target vocabulary. Implementations must be
//! deterministic and safe to share between threads.

mod http;
mod scripted;
mod toy;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::tokens::{TokenSeq, EOS};

pub use http::HttpScorer;
pub use scripted::ScriptedScorer;
pub use toy::{ToyModelError, ToyScorerModel, DEFAULT_ALPHA, DEFAULT_LAMBDA};

/// Log-probability used for impossible events. Finite so that it survives
/// serialization, and small enough that sums of a few thousand of them stay
/// finite and ordered.
pub const LOG_ZERO: f64 = -1.0e300;

/// `ln(p)` with zero mapped to [`LOG_ZERO`].
pub fn safe_ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln().max(LOG_ZERO)
    } else {
        LOG_ZERO
    }
}

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("source sentence is empty")]
    EmptySource,
    #[error("prefix contains the end-of-sentence marker at position {0}")]
    EosInPrefix(usize),
    #[error("target must end with a single end-of-sentence marker")]
    MalformedTarget,
    #[error("remote scorer: {0}")]
    Remote(String),
    #[error("remote scorer returned a distribution summing to {0}")]
    Normalization(f64),
}

/// Target vocabulary with a reverse index. Always contains [`EOS`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    eos: usize,
}

impl Vocab {
    /// Builds a vocabulary from `tokens`, appending [`EOS`] if missing.
    /// Duplicates keep their first position.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list = Vec::new();
        let mut index = HashMap::new();
        for token in tokens {
            let token = token.into();
            if !index.contains_key(&token) {
                index.insert(token.clone(), list.len());
                list.push(token);
            }
        }
        if !index.contains_key(EOS) {
            index.insert(EOS.to_owned(), list.len());
            list.push(EOS.to_owned());
        }
        let eos = index[EOS];
        Self {
            tokens: list,
            index,
            eos,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn eos(&self) -> usize {
        self.eos
    }
}

pub trait Scorer: Send + Sync {
    fn vocab(&self) -> &Vocab;

    /// Log-probabilities of every vocabulary entry (aligned with
    /// [`Vocab::tokens`]) as the next target token after `prefix`.
    ///
    /// Callers guarantee a non-empty source and an EOS-free prefix; use
    /// [`next_token_log_dist`] for the checked entry point.
    fn next_token_logprobs(
        &self,
        source: &TokenSeq,
        prefix: &[String],
    ) -> Result<Vec<f64>, ScorerError>;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn vocab(&self) -> &Vocab {
        (**self).vocab()
    }

    fn next_token_logprobs(
        &self,
        source: &TokenSeq,
        prefix: &[String],
    ) -> Result<Vec<f64>, ScorerError> {
        (**self).next_token_logprobs(source, prefix)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn vocab(&self) -> &Vocab {
        (**self).vocab()
    }

    fn next_token_logprobs(
        &self,
        source: &TokenSeq,
        prefix: &[String],
    ) -> Result<Vec<f64>, ScorerError> {
        (**self).next_token_logprobs(source, prefix)
    }
}

impl<S: Scorer + ?Sized> Scorer for std::sync::Arc<S> {
    fn vocab(&self) -> &Vocab {
        (**self).vocab()
    }

    fn next_token_logprobs(
        &self,
        source: &TokenSeq,
        prefix: &[String],
    ) -> Result<Vec<f64>, ScorerError> {
        (**self).next_token_logprobs(source, prefix)
    }
}

fn check_request(source: &TokenSeq, prefix: &[String]) -> Result<(), ScorerError> {
    if source.is_empty() {
        return Err(ScorerError::EmptySource);
    }
    if let Some(pos) = prefix.iter().position(|t| t == EOS) {
        return Err(ScorerError::EosInPrefix(pos));
    }
    Ok(())
}

/// Checked next-token distribution keyed by token string.
pub fn next_token_log_dist<S: Scorer + ?Sized>(
    scorer: &S,
    source: &TokenSeq,
    prefix: &[String],
) -> Result<BTreeMap<String, f64>, ScorerError> {
    check_request(source, prefix)?;
    let logprobs = scorer.next_token_logprobs(source, prefix)?;
    Ok(scorer
        .vocab()
        .tokens()
        .iter()
        .cloned()
        .zip(logprobs)
        .collect())
}

/// Log-probability of a complete target (which must end in a single EOS),
/// summed step by step. Impossible targets clamp to [`LOG_ZERO`].
pub fn sequence_log_prob<S: Scorer + ?Sized>(
    scorer: &S,
    source: &TokenSeq,
    target: &[String],
) -> Result<f64, ScorerError> {
    let Some((last, body)) = target.split_last() else {
        return Err(ScorerError::MalformedTarget);
    };
    if last != EOS || body.iter().any(|t| t == EOS) {
        return Err(ScorerError::MalformedTarget);
    }
    check_request(source, body)?;
    let vocab = scorer.vocab();
    let mut total = 0.0;
    for (i, token) in target.iter().enumerate() {
        let dist = scorer.next_token_logprobs(source, &target[..i])?;
        total += vocab.id(token).map_or(LOG_ZERO, |id| dist[id]);
    }
    Ok(total.max(LOG_ZERO))
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(logprobs: &[f64], skip: Option<usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &lp) in logprobs.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        match best {
            Some(b) if lp <= logprobs[b] => {}
            _ => best = Some(i),
        }
    }
    best
}
