//! Whitespace-tokenized sentences.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Virtual start-of-sentence context. Never emitted by a decoder.
pub const BOS: &str = "<s>";
/// End-of-sentence marker; terminates every complete hypothesis.
pub const EOS: &str = "</s>";
/// Stand-in for out-of-vocabulary source tokens.
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("empty token at position {0}")]
    Empty(usize),
    #[error("token {token:?} at position {position} contains whitespace")]
    Whitespace { position: usize, token: String },
}

/// An ordered sequence of tokens on one side of the translation pair.
///
/// Tokens are never empty and never contain whitespace, so joining with a
/// single space and splitting on whitespace is lossless.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenSeq {
    tokens: Vec<String>,
    side: Side,
}

impl TokenSeq {
    pub fn new<I, S>(tokens: I, side: Side) -> Result<Self, TokenError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        for (position, token) in tokens.iter().enumerate() {
            if token.is_empty() {
                return Err(TokenError::Empty(position));
            }
            if token.chars().any(char::is_whitespace) {
                return Err(TokenError::Whitespace {
                    position,
                    token: token.clone(),
                });
            }
        }
        Ok(Self { tokens, side })
    }

    /// Splits `text` on Unicode whitespace. Punctuation stays attached.
    pub fn tokenize(text: &str, side: Side) -> Self {
        Self {
            tokens: text.split_whitespace().map(str::to_owned).collect(),
            side,
        }
    }

    pub fn source(text: &str) -> Self {
        Self::tokenize(text, Side::Source)
    }

    pub fn target(text: &str) -> Self {
        Self::tokenize(text, Side::Target)
    }

    pub fn empty(side: Side) -> Self {
        Self {
            tokens: Vec::new(),
            side,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    /// Joins tokens with single spaces.
    pub fn detokenize(&self) -> String {
        self.tokens.join(" ")
    }

    /// Characters of the detokenized sentence: word characters plus one
    /// separating space between consecutive words.
    pub fn char_count(&self) -> usize {
        let letters: usize = self.tokens.iter().map(|t| t.chars().count()).sum();
        letters + self.tokens.len().saturating_sub(1)
    }
}

impl Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.tokens
    }
}

impl AsRef<[String]> for TokenSeq {
    fn as_ref(&self) -> &[String] {
        &self.tokens
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.detokenize())
    }
}
