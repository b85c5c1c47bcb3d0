//! A scorer that replays a fixed list of target sentences.
//!
//! The next token is predicted by the longest match between the end of the
//! current prefix and any position of any script (an unbounded-order n-gram
//! over the scripts). Ties go to the earlier script, then the earlier
//! position. The predicted token gets `peak` probability mass; the rest is
//! spread uniformly. A prefix whose last token appears in no script gets a
//! uniform distribution.
//!
//! This makes it possible to reproduce a recorded interactive session: each
//! script is one hypothesis the system is expected to propose, and forcing
//! feedback into the prefix steers prediction onto the later scripts.

use super::{Scorer, ScorerError, Vocab};
use crate::tokens::{TokenSeq, BOS};

#[derive(Debug, Clone)]
pub struct ScriptedScorer {
    vocab: Vocab,
    // Each script as vocabulary ids, framed by BOS (as `None`) and EOS.
    scripts: Vec<Vec<Option<usize>>>,
    peak: f64,
}

impl ScriptedScorer {
    pub const DEFAULT_PEAK: f64 = 0.9;

    pub fn new<I, S>(scripts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::with_peak(scripts, Self::DEFAULT_PEAK)
    }

    /// `peak` must lie in `(0, 1]`; with `peak == 1` the scorer is one-hot.
    pub fn with_peak<I, S>(scripts: I, peak: f64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        assert!(peak > 0.0 && peak <= 1.0, "peak must lie in (0, 1]");
        let sentences: Vec<Vec<String>> = scripts
            .into_iter()
            .map(|s| TokenSeq::target(s.as_ref()).into_tokens())
            .collect();
        let vocab = Vocab::new(sentences.iter().flatten().cloned());
        let scripts = sentences
            .iter()
            .map(|s| {
                std::iter::once(None)
                    .chain(s.iter().map(|t| vocab.id(t)))
                    .chain(std::iter::once(Some(vocab.eos())))
                    .collect()
            })
            .collect();
        Self {
            vocab,
            scripts,
            peak,
        }
    }

    /// The token the scripts predict after `prefix`, if any script matches.
    pub fn predict(&self, prefix: &[String]) -> Option<usize> {
        // Context framed with BOS; unknown words never match.
        let context: Vec<Option<Option<usize>>> = std::iter::once(Some(None))
            .chain(prefix.iter().map(|t| {
                if t == BOS {
                    Some(None)
                } else {
                    self.vocab.id(t).map(Some)
                }
            }))
            .collect();

        let mut best: Option<(usize, usize)> = None; // (match length, predicted id)
        for script in &self.scripts {
            for end in 0..script.len() - 1 {
                let k = context
                    .iter()
                    .rev()
                    .zip(script[..=end].iter().rev())
                    .take_while(|(c, s)| **c == Some(**s))
                    .count();
                if k > 0 && best.is_none_or(|(bk, _)| k > bk) {
                    if let Some(next) = script[end + 1] {
                        best = Some((k, next));
                    }
                }
            }
        }
        best.map(|(_, id)| id)
    }
}

impl Scorer for ScriptedScorer {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn next_token_logprobs(
        &self,
        source: &TokenSeq,
        prefix: &[String],
    ) -> Result<Vec<f64>, ScorerError> {
        if source.is_empty() {
            return Err(ScorerError::EmptySource);
        }
        let size = self.vocab.len();
        let probs = match self.predict(prefix) {
            Some(id) if size > 1 => {
                let rest = (1.0 - self.peak) / (size - 1) as f64;
                let mut p = vec![rest; size];
                p[id] = self.peak;
                p
            }
            _ => vec![1.0 / size as f64; size],
        };
        Ok(probs.into_iter().map(super::safe_ln).collect())
    }
}
