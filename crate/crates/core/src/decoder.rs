//! Greedy decoding, with and without user feedback.
//!
//! Unconstrained decoding emits the per-step argmax until `</s>` or the length
//! cap. Constrained decoding lays out the feedback skeleton
//! `gap_0 f_1 gap_1 ... f_N gap_N`, copies every segment verbatim and fills
//! each inner gap with the best of `M + 1` greedy continuations of length
//! `0..=M`. Candidates are compared by their joint log-probability *including*
//! the first token of the following segment, so that all of them end on the
//! same event and a zero-length gap (two segments merged) competes fairly.
//! The final gap is free: plain greedy generation until `</s>`.

use thiserror::Error;

use crate::feedback::{Feedback, FeedbackViolation};
use crate::hypothesis::{Hypothesis, Provenance};
use crate::scorer::{argmax, Scorer, ScorerError, LOG_ZERO};
use crate::tokens::{Side, TokenError, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderConfig {
    /// Longest inner gap considered (`M`).
    pub max_gap_len: usize,
    /// Hard cap on hypothesis length (`L`); `None` means `2 * |source| + 5`.
    pub max_total_len: Option<usize>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_gap_len: Self::DEFAULT_MAX_GAP,
            max_total_len: None,
        }
    }
}

impl DecoderConfig {
    pub const DEFAULT_MAX_GAP: usize = 5;

    pub fn with_max_gap(max_gap_len: usize) -> Self {
        Self {
            max_gap_len,
            ..Self::default()
        }
    }

    pub fn max_len_for(&self, source_len: usize) -> usize {
        self.max_total_len.unwrap_or(2 * source_len + 5)
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        if let Some(l) = self.max_total_len {
            if l == 0 || self.max_gap_len > l {
                return Err(DecodeError::Config(format!(
                    "need 1 <= L and M <= L, got M={} L={l}",
                    self.max_gap_len
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("invalid feedback: {0}")]
    Feedback(#[from] FeedbackViolation),
    #[error("forced segments hold {forced} tokens but the length cap is {max}")]
    ForcedTooLong { forced: usize, max: usize },
    #[error("invalid decoder configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Token(#[from] TokenError),
}

/// What follows a gap.
#[derive(Debug, Clone, Copy)]
pub enum Anchor<'a> {
    /// The words of the next validated segment.
    Segment(&'a [String]),
    /// Sentence end: the gap is the free tail of the hypothesis.
    End,
}

/// The chosen filler for one gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GapFill {
    pub tokens: Vec<String>,
    pub token_logprobs: Vec<f64>,
    /// Gap log-probability plus the log-probability of the first anchor token
    /// (or of `</s>` when a final gap terminated normally).
    pub anchored_logprob: f64,
    /// Log-probability of the first anchor token after this gap; `None` for
    /// the final gap.
    pub anchor_logprob: Option<f64>,
}

impl GapFill {
    pub fn width(&self) -> usize {
        self.tokens.len()
    }
}

fn token_logprob<S: Scorer + ?Sized>(scorer: &S, dist: &[f64], token: &str) -> f64 {
    scorer.vocab().id(token).map_or(LOG_ZERO, |id| dist[id])
}

/// Greedy decoding without feedback.
pub fn decode<S: Scorer + ?Sized>(
    scorer: &S,
    source: &TokenSeq,
    config: &DecoderConfig,
) -> Result<Hypothesis, DecodeError> {
    config.validate()?;
    if source.is_empty() {
        return Err(ScorerError::EmptySource.into());
    }
    let max_len = config.max_len_for(source.len());
    let vocab = scorer.vocab();
    let mut tokens = Vec::new();
    let mut logprobs = Vec::new();
    while tokens.len() < max_len {
        let dist = scorer.next_token_logprobs(source, &tokens)?;
        let Some(best) = argmax(&dist, None) else {
            break;
        };
        if best == vocab.eos() {
            break;
        }
        tokens.push(vocab.token(best).to_owned());
        logprobs.push(dist[best]);
    }
    let provenance = vec![Provenance::Generated; tokens.len()];
    Ok(Hypothesis {
        tokens: TokenSeq::new(tokens, Side::Target)?,
        token_logprobs: logprobs,
        provenance,
    })
}

/// Chooses the filler for the gap after `prefix`, using at most `budget` tokens.
pub fn fill_gap<S: Scorer + ?Sized>(
    scorer: &S,
    source: &TokenSeq,
    prefix: &[String],
    anchor: Anchor<'_>,
    budget: usize,
    config: &DecoderConfig,
) -> Result<GapFill, DecodeError> {
    let vocab = scorer.vocab();
    let eos = vocab.eos();
    let mut context = prefix.to_vec();
    let mut tokens = Vec::new();
    let mut logprobs = Vec::new();

    match anchor {
        Anchor::End => {
            let mut total = 0.0;
            while tokens.len() < budget {
                let dist = scorer.next_token_logprobs(source, &context)?;
                let Some(best) = argmax(&dist, None) else {
                    break;
                };
                if best == eos {
                    total += dist[eos];
                    break;
                }
                let token = vocab.token(best).to_owned();
                total += dist[best];
                context.push(token.clone());
                tokens.push(token);
                logprobs.push(dist[best]);
            }
            Ok(GapFill {
                tokens,
                token_logprobs: logprobs,
                anchored_logprob: total,
                anchor_logprob: None,
            })
        }
        Anchor::Segment(words) => {
            let first = words.first().map(String::as_str).unwrap_or_default();
            let max_width = config.max_gap_len.min(budget);
            let mut gap_score = 0.0;
            let mut best: Option<(usize, f64, f64)> = None; // (width, anchored, anchor term)
            for width in 0..=max_width {
                let dist = scorer.next_token_logprobs(source, &context)?;
                let anchor_lp = token_logprob(scorer, &dist, first);
                let anchored = gap_score + anchor_lp;
                if best.is_none_or(|(_, b, _)| anchored > b) {
                    best = Some((width, anchored, anchor_lp));
                }
                if width == max_width {
                    break;
                }
                let Some(next) = argmax(&dist, Some(eos)) else {
                    break;
                };
                let token = vocab.token(next).to_owned();
                gap_score += dist[next];
                context.push(token.clone());
                tokens.push(token);
                logprobs.push(dist[next]);
            }
            let (width, anchored, anchor_lp) = best.expect("width 0 is always scored");
            tokens.truncate(width);
            logprobs.truncate(width);
            Ok(GapFill {
                tokens,
                token_logprobs: logprobs,
                anchored_logprob: anchored,
                anchor_logprob: Some(anchor_lp),
            })
        }
    }
}

/// Decodes a hypothesis that contains every feedback segment verbatim and in order.
pub fn constrained_decode<S: Scorer + ?Sized>(
    scorer: &S,
    source: &TokenSeq,
    feedback: &Feedback,
    config: &DecoderConfig,
) -> Result<Hypothesis, DecodeError> {
    config.validate()?;
    feedback.validate()?;
    if source.is_empty() {
        return Err(ScorerError::EmptySource.into());
    }
    let max_len = config.max_len_for(source.len());
    let mut remaining_forced = feedback.forced_len();
    if remaining_forced > max_len {
        return Err(DecodeError::ForcedTooLong {
            forced: remaining_forced,
            max: max_len,
        });
    }

    let mut tokens: Vec<String> = Vec::with_capacity(max_len);
    let mut logprobs = Vec::with_capacity(max_len);
    let mut provenance = Vec::with_capacity(max_len);

    for segment in &feedback.segments {
        let budget = max_len - tokens.len() - remaining_forced;
        let fill = fill_gap(
            scorer,
            source,
            &tokens,
            Anchor::Segment(&segment.words),
            budget,
            config,
        )?;
        provenance.extend(std::iter::repeat_n(Provenance::Generated, fill.width()));
        tokens.extend(fill.tokens);
        logprobs.extend(fill.token_logprobs);

        for (i, word) in segment.words.iter().enumerate() {
            let lp = match (i, fill.anchor_logprob) {
                (0, Some(lp)) => lp,
                _ => {
                    let dist = scorer.next_token_logprobs(source, &tokens)?;
                    token_logprob(scorer, &dist, word)
                }
            };
            tokens.push(word.clone());
            logprobs.push(lp);
            provenance.push(Provenance::Forced);
        }
        remaining_forced -= segment.len();
    }

    let budget = max_len - tokens.len();
    let tail = fill_gap(scorer, source, &tokens, Anchor::End, budget, config)?;
    provenance.extend(std::iter::repeat_n(Provenance::Generated, tail.width()));
    tokens.extend(tail.tokens);
    logprobs.extend(tail.token_logprobs);

    Ok(Hypothesis {
        tokens: TokenSeq::new(tokens, Side::Target)?,
        token_logprobs: logprobs,
        provenance,
    })
}
