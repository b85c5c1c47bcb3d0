//! The simulated user.
//!
//! Each turn the user aligns the hypothesis with the reference through a
//! longest common subsequence, validates every maximal run of matched words,
//! deletes junk between runs that are adjacent in the reference, and types
//! the leftmost missing reference word. The system then re-decodes under that
//! feedback. The loop ends when the hypothesis equals the reference, or when
//! every reference word is already matched and deleting the leftover words
//! produces it; the user then accepts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{constrained_decode, decode, DecodeError, DecoderConfig};
use crate::feedback::{Feedback, ValidatedSegment};
use crate::hypothesis::{EffortTally, Hypothesis};
use crate::scorer::Scorer;
use crate::tokens::TokenSeq;

/// Mouse-action prices of the simulated user's gestures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub select_one_word: u64,
    pub select_multi_word: u64,
    pub merge_zero_words_between: u64,
    pub merge_one_word_between: u64,
    pub merge_multi_word_between: u64,
    pub correction_move: u64,
    pub accept_final: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            select_one_word: 1,
            select_multi_word: 2,
            merge_zero_words_between: 0,
            merge_one_word_between: 1,
            merge_multi_word_between: 2,
            correction_move: 1,
            accept_final: 1,
        }
    }
}

impl CostModel {
    /// Click (one word) or click-and-drag (several words) over a segment.
    pub fn selection(&self, words: usize) -> u64 {
        if words <= 1 {
            self.select_one_word
        } else {
            self.select_multi_word
        }
    }

    /// Deleting the `between` words that separate two segments.
    pub fn merge(&self, between: usize) -> u64 {
        match between {
            0 => self.merge_zero_words_between,
            1 => self.merge_one_word_between,
            _ => self.merge_multi_word_between,
        }
    }

    /// Moving to the error and typing `word`.
    pub fn correction(&self, word: &str) -> EffortTally {
        EffortTally::new(1, word.chars().count() as u64, self.correction_move)
    }

    pub fn accept(&self) -> EffortTally {
        EffortTally::mouse(self.accept_final)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub max_iterations: usize,
    pub costs: CostModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            costs: CostModel::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("reference is empty")]
    EmptyReference,
    #[error("max_iterations must be at least 1")]
    NoIterations,
    #[error("session did not converge within {0} iterations")]
    NonTermination(usize),
}

/// Matched `(hypothesis index, reference index)` pairs of a longest common
/// subsequence, strictly increasing in both coordinates.
///
/// Ties are resolved deterministically: equal tokens are matched as soon as
/// they are met, otherwise the hypothesis advances unless that loses length.
pub fn lcs_match(hypothesis: &[String], reference: &[String]) -> Vec<(usize, usize)> {
    let (n, m) = (hypothesis.len(), reference.len());
    // suffix[i][j] = LCS length of hypothesis[i..] and reference[j..]
    let mut suffix = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suffix[i][j] = if hypothesis[i] == reference[j] {
                suffix[i + 1][j + 1] + 1
            } else {
                suffix[i + 1][j].max(suffix[i][j + 1])
            };
        }
    }
    let mut pairs = Vec::with_capacity(suffix[0][0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if hypothesis[i] == reference[j] {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if suffix[i + 1][j] >= suffix[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

/// A maximal run of matches contiguous in both sequences; inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedRun {
    pub hyp: (usize, usize),
    pub reference: (usize, usize),
}

impl MatchedRun {
    pub fn words(&self) -> usize {
        self.hyp.1 - self.hyp.0 + 1
    }
}

pub fn matched_runs(pairs: &[(usize, usize)]) -> Vec<MatchedRun> {
    let mut runs: Vec<MatchedRun> = Vec::new();
    for &(h, r) in pairs {
        match runs.last_mut() {
            Some(run) if run.hyp.1 + 1 == h && run.reference.1 + 1 == r => {
                run.hyp.1 = h;
                run.reference.1 = r;
            }
            _ => runs.push(MatchedRun {
                hyp: (h, h),
                reference: (r, r),
            }),
        }
    }
    runs
}

/// The user's reaction to one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackStep {
    pub feedback: Feedback,
    pub effort: EffortTally,
    /// Reference indices fixed by this feedback (validated runs and correction).
    pub covered: BTreeSet<usize>,
    /// Reference index of the corrected word; `None` when every reference word
    /// was already matched and the user only had to delete junk.
    pub correction: Option<usize>,
    /// Mouse actions spent deleting words between or around matched runs.
    pub deletions: u64,
}

/// Derives feedback and its cost for `hypothesis` against `reference`.
///
/// Only runs that fix at least one reference index outside
/// `previously_covered` are charged a selection; segments validated in an
/// earlier turn come back verbatim and need no new click.
pub fn extract_feedback(
    hypothesis: &[String],
    reference: &[String],
    previously_covered: &BTreeSet<usize>,
    costs: &CostModel,
) -> FeedbackStep {
    let runs = matched_runs(&lcs_match(hypothesis, reference));
    let mut effort = EffortTally::default();

    for run in &runs {
        let (start, end) = run.reference;
        if (start..=end).any(|j| !previously_covered.contains(&j)) {
            effort.mouse_actions += costs.selection(run.words());
        }
    }
    let mut deletions = 0;
    for pair in runs.windows(2) {
        if pair[0].reference.1 + 1 == pair[1].reference.0 {
            deletions += costs.merge(pair[1].hyp.0 - pair[0].hyp.1 - 1);
        }
    }

    let mut covered: BTreeSet<usize> = runs
        .iter()
        .flat_map(|r| r.reference.0..=r.reference.1)
        .collect();
    let correction = (0..reference.len()).find(|j| !covered.contains(j));

    let mut segments: Vec<ValidatedSegment> = runs
        .iter()
        .map(|r| {
            ValidatedSegment::validated(hypothesis[r.hyp.0..=r.hyp.1].iter().cloned())
                .with_ref_span(r.reference.0, r.reference.1)
        })
        .collect();

    match correction {
        Some(j) => {
            let word = &reference[j];
            effort += costs.correction(word);
            let rank = runs.iter().filter(|r| r.reference.0 < j).count();
            segments.insert(
                rank,
                ValidatedSegment::correction(word.clone()).with_ref_span(j, j),
            );
            covered.insert(j);
        }
        None => {
            // Everything is matched: the remaining edits are deletions of
            // words before the first run and after the last one.
            if let (Some(first), Some(last)) = (runs.first(), runs.last()) {
                let leading = first.hyp.0;
                let trailing = hypothesis.len() - 1 - last.hyp.1;
                if leading > 0 {
                    deletions += costs.merge(leading);
                }
                if trailing > 0 {
                    deletions += costs.merge(trailing);
                }
            }
        }
    }
    effort.mouse_actions += deletions;

    FeedbackStep {
        feedback: Feedback::new(segments),
        effort,
        covered,
        correction,
        deletions,
    }
}

/// One feedback turn of a session.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub hypothesis_before: Hypothesis,
    pub feedback: Feedback,
    pub effort: EffortTally,
}

impl IterationRecord {
    pub fn mouse_actions(&self) -> u64 {
        self.effort.mouse_actions
    }

    pub fn key_strokes(&self) -> u64 {
        self.effort.key_strokes
    }

    pub fn word_strokes(&self) -> u64 {
        self.effort.word_strokes
    }
}

/// The full trace of one simulated session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub source: TokenSeq,
    pub reference: TokenSeq,
    /// The system's first proposal, before any feedback.
    pub initial_hypothesis: TokenSeq,
    pub iterations: Vec<IterationRecord>,
    /// The last system hypothesis. Equals the reference unless the user
    /// finished by deleting leftover words.
    pub last_hypothesis: TokenSeq,
    /// Cost of the closing step: residual deletions plus the accept click.
    pub acceptance: EffortTally,
    pub final_hypothesis: TokenSeq,
    pub totals: EffortTally,
}

impl SessionLog {
    pub fn to_record(&self) -> SessionRecord {
        SessionRecord {
            source: self.source.tokens().to_vec(),
            reference: self.reference.tokens().to_vec(),
            iterations: self
                .iterations
                .iter()
                .map(|it| IterationEntry {
                    feedback: it.feedback.clone(),
                    ma: it.effort.mouse_actions,
                    ks: it.effort.key_strokes,
                    ws: it.effort.word_strokes,
                })
                .collect(),
            totals: self.totals,
        }
    }
}

/// Serialized form of a session: one JSON object per line in log files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub source: Vec<String>,
    pub reference: Vec<String>,
    pub iterations: Vec<IterationEntry>,
    pub totals: EffortTally,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationEntry {
    pub feedback: Feedback,
    pub ma: u64,
    pub ks: u64,
    pub ws: u64,
}

impl SessionRecord {
    /// Words of the final translation, which equals the reference.
    pub fn final_words(&self) -> usize {
        self.reference.len()
    }

    pub fn final_chars(&self) -> usize {
        let letters: usize = self.reference.iter().map(|t| t.chars().count()).sum();
        letters + self.reference.len().saturating_sub(1)
    }
}

/// Drives one sentence to the reference translation.
pub fn run_session<S: Scorer + ?Sized>(
    scorer: &S,
    source: &TokenSeq,
    reference: &TokenSeq,
    decoder_config: &DecoderConfig,
    sim_config: &SimConfig,
) -> Result<SessionLog, SimError> {
    if reference.is_empty() {
        return Err(SimError::EmptyReference);
    }
    if sim_config.max_iterations == 0 {
        return Err(SimError::NoIterations);
    }
    // Feedback never holds more words than the reference.
    let decoder_config = DecoderConfig {
        max_total_len: Some(
            decoder_config
                .max_len_for(source.len())
                .max(reference.len()),
        ),
        ..*decoder_config
    };

    let mut hypothesis = decode(scorer, source, &decoder_config)?;
    let initial_hypothesis = hypothesis.tokens.clone();
    let mut covered = BTreeSet::new();
    let mut iterations = Vec::new();
    let mut closing = EffortTally::default();

    while hypothesis.tokens.tokens() != reference.tokens() {
        let step = extract_feedback(&hypothesis.tokens, reference, &covered, &sim_config.costs);
        if step.correction.is_none() {
            // Every reference word is in place; deleting the leftovers
            // yields the reference and the user accepts.
            closing = EffortTally::mouse(step.deletions);
            break;
        }
        if iterations.len() == sim_config.max_iterations {
            return Err(SimError::NonTermination(sim_config.max_iterations));
        }
        covered.extend(step.covered.iter().copied());
        let next = constrained_decode(scorer, source, &step.feedback, &decoder_config)?;
        iterations.push(IterationRecord {
            hypothesis_before: std::mem::replace(&mut hypothesis, next),
            feedback: step.feedback,
            effort: step.effort,
        });
    }

    let acceptance = closing + sim_config.costs.accept();
    let totals = iterations.iter().map(|it| it.effort).sum::<EffortTally>() + acceptance;
    Ok(SessionLog {
        source: source.clone(),
        reference: reference.clone(),
        initial_hypothesis,
        last_hypothesis: hypothesis.tokens,
        iterations,
        acceptance,
        final_hypothesis: reference.clone(),
        totals,
    })
}
