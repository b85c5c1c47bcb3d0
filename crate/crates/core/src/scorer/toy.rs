//! A small lexical-table plus bigram model that stands in for a neural scorer.
//!
//! The next-token probability mixes a source-conditioned lexical term with an
//! add-alpha smoothed bigram over the target side:
//!
//! ```text
//! p(y | prefix, src) = lambda * (1/J) * sum_j lex(y | x_j)
//!                    + (1 - lambda) * (bigram(u, y) + alpha) / (sum_y' bigram(u, y') + alpha * |V|)
//! ```
//!
//! where `u` is the last prefix token (or `<s>`) and `V` is the target
//! vocabulary including `</s>`.
//!
//! # File format
//!
//! ```text
//! # comment
//! [params]
//! lambda=0.7
//! alpha=0.1
//! [lex]
//! el the 1.0
//! [bigram]
//! <s> the 0.5
//! the </s> 1.0
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{safe_ln, Scorer, ScorerError, Vocab};
use crate::tokens::{TokenSeq, BOS, EOS, UNK};

pub const DEFAULT_LAMBDA: f64 = 0.7;
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Rows further than this from 1 are rejected.
const ROW_SUM_TOLERANCE: f64 = 1e-6;
/// Rows closer than this to 1 are kept bit-for-bit.
const ROW_SUM_EXACT: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ToyModelError {
    #[error("reading model: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate {table} entry ({prev}, {next}) at line {line}")]
    Duplicate {
        table: &'static str,
        prev: String,
        next: String,
        line: usize,
    },
    #[error("{table} row {row:?} has row sum {sum}, expected 1")]
    RowSum {
        table: &'static str,
        row: String,
        sum: f64,
    },
    #[error("invalid parameter: {0}")]
    Param(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> ToyModelError {
    ToyModelError::Parse {
        line,
        message: message.into(),
    }
}

type Row = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyScorerModel {
    lambda: f64,
    alpha: f64,
    src_vocab: Vec<String>,
    vocab: Vocab,
    lex: BTreeMap<String, Row>,
    bigram: BTreeMap<String, Row>,
    // Row sums of `bigram` (1 after normalization); contexts without a row use 0.
    bigram_mass: HashMap<String, f64>,
}

/// One `(context, token, probability)` line of a table, with its file line.
#[derive(Debug, Clone)]
struct Entry {
    prev: String,
    next: String,
    prob: f64,
    line: usize,
}

impl ToyScorerModel {
    /// Builds a model from `(source, target, prob)` lexical entries and
    /// `(previous, next, prob)` bigram entries.
    pub fn new<L, B, S1, S2, S3, S4>(
        lambda: f64,
        alpha: f64,
        lex: L,
        bigram: B,
    ) -> Result<Self, ToyModelError>
    where
        L: IntoIterator<Item = (S1, S2, f64)>,
        B: IntoIterator<Item = (S3, S4, f64)>,
        S1: Into<String>,
        S2: Into<String>,
        S3: Into<String>,
        S4: Into<String>,
    {
        let lex = lex
            .into_iter()
            .map(|(p, n, prob)| Entry {
                prev: p.into(),
                next: n.into(),
                prob,
                line: 0,
            })
            .collect();
        let bigram = bigram
            .into_iter()
            .map(|(p, n, prob)| Entry {
                prev: p.into(),
                next: n.into(),
                prob,
                line: 0,
            })
            .collect();
        Self::build(lambda, alpha, lex, bigram)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ToyModelError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ToyModelError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Params,
            Lex,
            Bigram,
        }
        let mut section = Section::None;
        let mut lambda = None;
        let mut alpha = None;
        let mut lex = Vec::new();
        let mut bigram = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match trimmed {
                "[params]" => section = Section::Params,
                "[lex]" => section = Section::Lex,
                "[bigram]" => section = Section::Bigram,
                _ if trimmed.starts_with('[') && trimmed.ends_with(']') => {
                    return Err(parse_err(line, format!("unknown section {trimmed}")));
                }
                _ => match section {
                    Section::None => {
                        return Err(parse_err(line, "entry outside of any section"));
                    }
                    Section::Params => {
                        let (key, value) = trimmed
                            .split_once('=')
                            .ok_or_else(|| parse_err(line, "expected key=value"))?;
                        let value: f64 = value
                            .trim()
                            .parse()
                            .map_err(|_| parse_err(line, format!("bad number {value:?}")))?;
                        let slot = match key.trim() {
                            "lambda" => &mut lambda,
                            "alpha" => &mut alpha,
                            other => {
                                return Err(parse_err(line, format!("unknown parameter {other:?}")))
                            }
                        };
                        if slot.replace(value).is_some() {
                            return Err(parse_err(
                                line,
                                format!("parameter {} set twice", key.trim()),
                            ));
                        }
                    }
                    Section::Lex | Section::Bigram => {
                        let fields: Vec<&str> = trimmed.split_whitespace().collect();
                        let [prev, next, prob] = fields[..] else {
                            return Err(parse_err(
                                line,
                                format!("expected 3 fields, found {}", fields.len()),
                            ));
                        };
                        let prob: f64 = prob
                            .parse()
                            .map_err(|_| parse_err(line, format!("bad probability {prob:?}")))?;
                        let entry = Entry {
                            prev: prev.to_owned(),
                            next: next.to_owned(),
                            prob,
                            line,
                        };
                        if section == Section::Lex {
                            lex.push(entry);
                        } else {
                            bigram.push(entry);
                        }
                    }
                },
            }
        }
        Self::build(
            lambda.unwrap_or(DEFAULT_LAMBDA),
            alpha.unwrap_or(DEFAULT_ALPHA),
            lex,
            bigram,
        )
    }

    fn build(
        lambda: f64,
        alpha: f64,
        lex: Vec<Entry>,
        bigram: Vec<Entry>,
    ) -> Result<Self, ToyModelError> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(ToyModelError::Param(format!(
                "lambda {lambda} outside [0, 1]"
            )));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ToyModelError::Param(format!(
                "alpha {alpha} must be positive"
            )));
        }

        let mut targets = BTreeSet::new();
        let mut sources = BTreeSet::new();
        for e in &lex {
            check_entry(e)?;
            if e.next == EOS || e.next == BOS || e.next == UNK {
                return Err(parse_err(
                    e.line,
                    format!("reserved lex target {:?}", e.next),
                ));
            }
            sources.insert(e.prev.clone());
            targets.insert(e.next.clone());
        }
        for e in &bigram {
            check_entry(e)?;
            if e.prev == EOS || e.next == BOS {
                return Err(parse_err(
                    e.line,
                    "misplaced sentence marker in bigram entry",
                ));
            }
            if e.prev != BOS {
                targets.insert(e.prev.clone());
            }
            if e.next != EOS {
                targets.insert(e.next.clone());
            }
        }
        sources.insert(UNK.to_owned());
        let vocab = Vocab::new(targets);

        let lex = collect_rows("lex", &vocab, lex)?;
        let bigram = collect_rows("bigram", &vocab, bigram)?;
        let bigram_mass = bigram
            .iter()
            .map(|(k, row)| (k.clone(), row.iter().map(|(_, p)| p).sum()))
            .collect();

        Ok(Self {
            lambda,
            alpha,
            src_vocab: sources.into_iter().collect(),
            vocab,
            lex,
            bigram,
            bigram_mass,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Source tokens with a lexical row, plus `<unk>`.
    pub fn src_vocab(&self) -> &[String] {
        &self.src_vocab
    }

    /// Target words, excluding `</s>`.
    pub fn target_words(&self) -> impl Iterator<Item = &str> {
        let eos = self.vocab.eos();
        self.vocab
            .tokens()
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != eos)
            .map(|(_, t)| t.as_str())
    }

    /// Probabilities (not logs) of every vocabulary entry.
    pub fn next_token_probs(&self, source: &TokenSeq, prefix: &[String]) -> Vec<f64> {
        let size = self.vocab.len();
        let mut lexmix = vec![0.0; size];
        let share = 1.0 / source.len() as f64;
        for x in source.iter() {
            let row = self.lex.get(x).or_else(|| self.lex.get(UNK));
            match row {
                Some(row) => {
                    for &(id, p) in row {
                        lexmix[id] += share * p;
                    }
                }
                None => {
                    let uniform = share / size as f64;
                    lexmix.iter_mut().for_each(|v| *v += uniform);
                }
            }
        }

        let context = prefix.last().map_or(BOS, String::as_str);
        let mass = self.bigram_mass.get(context).copied().unwrap_or(0.0);
        let denom = mass + self.alpha * size as f64;
        let mut bigram = vec![self.alpha; size];
        if let Some(row) = self.bigram.get(context) {
            for &(id, p) in row {
                bigram[id] += p;
            }
        }

        lexmix
            .iter()
            .zip(&bigram)
            .map(|(l, b)| self.lambda * l + (1.0 - self.lambda) * (b / denom))
            .collect()
    }

    /// Serializes in the loadable text format. Entries are written in sorted
    /// order so equal models produce identical files.
    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[params]");
        let _ = writeln!(out, "lambda={}", self.lambda);
        let _ = writeln!(out, "alpha={}", self.alpha);
        let _ = writeln!(out, "[lex]");
        for (src, row) in &self.lex {
            for &(id, p) in row {
                let _ = writeln!(out, "{src} {} {p}", self.vocab.token(id));
            }
        }
        let _ = writeln!(out, "[bigram]");
        for (prev, row) in &self.bigram {
            for &(id, p) in row {
                let _ = writeln!(out, "{prev} {} {p}", self.vocab.token(id));
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_model_string())
    }
}

fn check_entry(e: &Entry) -> Result<(), ToyModelError> {
    if !(e.prob.is_finite() && (0.0..=1.0).contains(&e.prob)) {
        return Err(parse_err(
            e.line,
            format!("probability {} outside [0, 1]", e.prob),
        ));
    }
    Ok(())
}

fn collect_rows(
    table: &'static str,
    vocab: &Vocab,
    entries: Vec<Entry>,
) -> Result<BTreeMap<String, Row>, ToyModelError> {
    let mut rows: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for e in entries {
        let id = vocab
            .id(&e.next)
            .expect("targets were collected from entries");
        let row = rows.entry(e.prev.clone()).or_default();
        if row.insert(id, e.prob).is_some() {
            return Err(ToyModelError::Duplicate {
                table,
                prev: e.prev,
                next: e.next,
                line: e.line,
            });
        }
    }
    rows.into_iter()
        .map(|(key, row)| {
            let sum: f64 = row.values().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ToyModelError::RowSum {
                    table,
                    row: key,
                    sum,
                });
            }
            let scale = if (sum - 1.0).abs() > ROW_SUM_EXACT {
                sum
            } else {
                1.0
            };
            let row = row.into_iter().map(|(id, p)| (id, p / scale)).collect();
            Ok((key, row))
        })
        .collect()
}

impl Scorer for ToyScorerModel {
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
        Ok(self
            .next_token_probs(source, prefix)
            .into_iter()
            .map(safe_ln)
            .collect())
    }
}
