//! Translation quality (BLEU, TER) and interactive effort (WSR, KSR, MAR).
//!
//! All values are percentages.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simulator::SessionRecord;

pub const MAX_NGRAM: usize = 4;
/// Longest block a TER shift may move.
pub const MAX_SHIFT_LEN: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch {
        hypotheses: usize,
        references: usize,
    },
    #[error("reference {0} is empty")]
    EmptyReference(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusScores {
    pub bleu: f64,
    pub ter: f64,
    pub wsr: f64,
    pub ksr: f64,
    pub mar: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BleuOptions {
    /// Replaces zero n-gram matches with this count. Off by default.
    pub smooth_epsilon: Option<f64>,
}

/// Corpus-level BLEU with up to 4-grams and brevity penalty.
///
/// Orders for which the hypotheses contain no n-grams at all are left out of
/// the geometric mean; any order with n-grams but no match yields 0.
pub fn bleu<H, R>(hypotheses: &[H], references: &[R]) -> Result<f64, MetricError>
where
    H: AsRef<[String]>,
    R: AsRef<[String]>,
{
    bleu_with(hypotheses, references, BleuOptions::default())
}

pub fn bleu_with<H, R>(
    hypotheses: &[H],
    references: &[R],
    options: BleuOptions,
) -> Result<f64, MetricError>
where
    H: AsRef<[String]>,
    R: AsRef<[String]>,
{
    check_corpus(hypotheses.len(), references.len())?;
    let mut matches = [0u64; MAX_NGRAM];
    let mut totals = [0u64; MAX_NGRAM];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);

    for (hyp, reference) in hypotheses.iter().zip(references) {
        let (hyp, reference) = (hyp.as_ref(), reference.as_ref());
        hyp_len += hyp.len();
        ref_len += reference.len();
        for n in 1..=MAX_NGRAM {
            let ref_counts = ngram_counts(reference, n);
            for (gram, count) in ngram_counts(hyp, n) {
                totals[n - 1] += count;
                matches[n - 1] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
            }
        }
    }

    if hyp_len == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 0..MAX_NGRAM {
        if totals[n] == 0 {
            continue;
        }
        let hits = if matches[n] == 0 {
            match options.smooth_epsilon {
                Some(eps) => eps,
                None => return Ok(0.0),
            }
        } else {
            matches[n] as f64
        };
        log_sum += (hits / totals[n] as f64).ln();
        orders += 1;
    }
    let brevity = if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    Ok(100.0 * brevity * (log_sum / orders as f64).exp())
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn check_corpus(hypotheses: usize, references: usize) -> Result<(), MetricError> {
    if hypotheses != references {
        return Err(MetricError::LengthMismatch {
            hypotheses,
            references,
        });
    }
    if hypotheses == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(())
}

/// Word-level Levenshtein distance.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Shift count and residual edit distance of the greedy TER alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerEdits {
    pub shifts: usize,
    pub edits: usize,
}

impl TerEdits {
    pub fn total(&self) -> usize {
        self.shifts + self.edits
    }
}

/// Greedy shift search: repeatedly move the block (a contiguous hypothesis
/// run of at most [`MAX_SHIFT_LEN`] words that also occurs contiguously in
/// the reference) whose move lowers the edit distance the most. Candidates
/// are scanned leftmost block first, then shortest, then earliest
/// destination; the first best one wins. Stops when no move helps.
pub fn ter_edits(hypothesis: &[String], reference: &[String]) -> TerEdits {
    let mut current: Vec<&String> = hypothesis.iter().collect();
    let reference: Vec<&String> = reference.iter().collect();
    let mut distance = edit_distance(&current, &reference);
    let mut shifts = 0;

    loop {
        let mut best: Option<(usize, Vec<&String>)> = None;
        let n = current.len();
        for start in 0..n {
            for len in 1..=MAX_SHIFT_LEN.min(n - start) {
                let block = &current[start..start + len];
                if !reference.windows(len).any(|w| w == block) {
                    continue;
                }
                let mut rest = current.clone();
                let moved: Vec<&String> = rest.drain(start..start + len).collect();
                for dest in 0..=rest.len() {
                    if dest == start {
                        continue;
                    }
                    let mut candidate = rest.clone();
                    candidate.splice(dest..dest, moved.iter().copied());
                    let d = edit_distance(&candidate, &reference);
                    let gain = distance.saturating_sub(d);
                    if d < distance && best.as_ref().is_none_or(|(g, _)| gain > *g) {
                        best = Some((gain, candidate));
                    }
                }
            }
        }
        match best {
            Some((gain, candidate)) => {
                current = candidate;
                distance -= gain;
                shifts += 1;
            }
            None => break,
        }
    }
    TerEdits {
        shifts,
        edits: distance,
    }
}

/// Sentence TER against a non-empty reference.
pub fn ter(hypothesis: &[String], reference: &[String]) -> Result<f64, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference(0));
    }
    Ok(100.0 * ter_edits(hypothesis, reference).total() as f64 / reference.len() as f64)
}

/// Corpus TER: total edits over total reference words.
pub fn corpus_ter<H, R>(hypotheses: &[H], references: &[R]) -> Result<f64, MetricError>
where
    H: AsRef<[String]>,
    R: AsRef<[String]>,
{
    check_corpus(hypotheses.len(), references.len())?;
    let mut edits = 0usize;
    let mut words = 0usize;
    for (i, (hyp, reference)) in hypotheses.iter().zip(references).enumerate() {
        let reference = reference.as_ref();
        if reference.is_empty() {
            return Err(MetricError::EmptyReference(i));
        }
        edits += ter_edits(hyp.as_ref(), reference).total();
        words += reference.len();
    }
    Ok(100.0 * edits as f64 / words as f64)
}

/// Micro-averaged WSR, KSR and MAR over finished sessions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffortRatios {
    pub wsr: f64,
    pub ksr: f64,
    pub mar: f64,
}

pub fn effort_metrics(logs: &[SessionRecord]) -> Result<EffortRatios, MetricError> {
    if logs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let (mut ws, mut ks, mut ma) = (0u64, 0u64, 0u64);
    let (mut words, mut chars) = (0usize, 0usize);
    for log in logs {
        ws += log.totals.word_strokes;
        ks += log.totals.key_strokes;
        ma += log.totals.mouse_actions;
        words += log.final_words();
        chars += log.final_chars();
    }
    Ok(EffortRatios {
        wsr: 100.0 * ws as f64 / words as f64,
        ksr: 100.0 * ks as f64 / chars as f64,
        mar: 100.0 * ma as f64 / chars as f64,
    })
}
