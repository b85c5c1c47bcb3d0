//! Deterministic scorers with known structure.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use imt_core::{Scorer, ScorerError, TokenSeq, ToyScorerModel, Vocab};
use rand::Rng;

/// A scorer whose distribution depends only on the prefix length. Greedy
/// search is exact for it: the best sequence of a given length is the
/// per-position argmax, whatever the tokens chosen before.
#[derive(Debug, Clone)]
pub struct PositionScorer {
    vocab: Vocab,
    /// Log-probabilities per prefix length; the last row repeats forever.
    pub rows: Vec<Vec<f64>>,
}

impl PositionScorer {
    pub fn new(tokens: &[String], rows: Vec<Vec<f64>>) -> Self {
        let vocab = Vocab::new(tokens.iter().cloned());
        assert!(rows.iter().all(|r| r.len() == vocab.len()));
        Self { vocab, rows }
    }

    /// `n_tokens` words `w0..` plus EOS, with random distributions for
    /// `positions` prefix lengths.
    pub fn random(rng: &mut impl Rng, n_tokens: usize, positions: usize) -> Self {
        let tokens: Vec<String> = (0..n_tokens).map(|i| format!("w{i}")).collect();
        let rows = (0..positions.max(1))
            .map(|_| random_log_dist(rng, n_tokens + 1))
            .collect();
        Self::new(&tokens, rows)
    }
}

impl Scorer for PositionScorer {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn next_token_logprobs(
        &self,
        _source: &TokenSeq,
        prefix: &[String],
    ) -> Result<Vec<f64>, ScorerError> {
        Ok(self.rows[prefix.len().min(self.rows.len() - 1)].clone())
    }
}

/// A content-dependent scorer: the distribution is a pseudo-random function
/// of the source and the whole prefix.
#[derive(Debug, Clone)]
pub struct HashScorer {
    vocab: Vocab,
    seed: u64,
}

impl HashScorer {
    pub fn new(n_tokens: usize, seed: u64) -> Self {
        Self {
            vocab: Vocab::new((0..n_tokens).map(|i| format!("w{i}"))),
            seed,
        }
    }
}

impl Scorer for HashScorer {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn next_token_logprobs(
        &self,
        source: &TokenSeq,
        prefix: &[String],
    ) -> Result<Vec<f64>, ScorerError> {
        let weights: Vec<f64> = (0..self.vocab.len())
            .map(|id| {
                let mut h = DefaultHasher::new();
                (self.seed, source.tokens(), prefix, id).hash(&mut h);
                1.0 + (h.finish() % 1000) as f64
            })
            .collect();
        let total: f64 = weights.iter().sum();
        Ok(weights.iter().map(|w| (w / total).ln()).collect())
    }
}

pub fn random_log_dist(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| (w / total).ln()).collect()
}

fn random_row(rng: &mut impl Rng, targets: &[String], max_entries: usize) -> Vec<(String, f64)> {
    let k = rng.gen_range(1..=max_entries.min(targets.len()));
    let mut chosen: Vec<&String> = Vec::new();
    while chosen.len() < k {
        let t = &targets[rng.gen_range(0..targets.len())];
        if !chosen.contains(&t) {
            chosen.push(t);
        }
    }
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    chosen
        .into_iter()
        .zip(weights)
        .map(|(t, w)| (t.clone(), w / total))
        .collect()
}

/// A randomly generated toy model with its source and target word lists.
#[derive(Debug, Clone)]
pub struct RandomToy {
    pub model: ToyScorerModel,
    pub source_words: Vec<String>,
    pub target_words: Vec<String>,
}

impl RandomToy {
    pub fn generate(rng: &mut impl Rng, n_source: usize, n_target: usize) -> Self {
        let source_words: Vec<String> = (0..n_source).map(|i| format!("s{i}")).collect();
        let target_words: Vec<String> = (0..n_target).map(|i| format!("t{i}")).collect();
        let mut lex = Vec::new();
        for s in &source_words {
            for (t, p) in random_row(rng, &target_words, 3) {
                lex.push((s.clone(), t, p));
            }
        }
        let mut with_eos = target_words.clone();
        with_eos.push(imt_core::EOS.to_owned());
        let mut bigram = Vec::new();
        let prevs = std::iter::once(imt_core::BOS.to_owned()).chain(target_words.iter().cloned());
        for prev in prevs {
            if rng.gen_bool(0.8) {
                for (t, p) in random_row(rng, &with_eos, 4) {
                    bigram.push((prev.clone(), t, p));
                }
            }
        }
        let lambda = rng.gen_range(0.0..=1.0);
        let alpha = rng.gen_range(0.01..1.0);
        let model = ToyScorerModel::new(lambda, alpha, lex, bigram).expect("rows are normalized");
        Self {
            model,
            source_words,
            target_words,
        }
    }

    pub fn random_source(&self, rng: &mut impl Rng, max_len: usize) -> TokenSeq {
        let n = rng.gen_range(1..=max_len);
        let words =
            (0..n).map(|_| self.source_words[rng.gen_range(0..self.source_words.len())].clone());
        TokenSeq::new(words, imt_core::Side::Source).unwrap()
    }

    pub fn random_target(&self, rng: &mut impl Rng, min_len: usize, max_len: usize) -> Vec<String> {
        let n = rng.gen_range(min_len..=max_len);
        (0..n)
            .map(|_| self.target_words[rng.gen_range(0..self.target_words.len())].clone())
            .collect()
    }
}
