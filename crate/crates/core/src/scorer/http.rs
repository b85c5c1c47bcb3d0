//! Client for an external scorer service speaking JSON over HTTP.
//!
//! * `GET  {base}/v1/vocab` returns `{"tokens": [...]}`.
//! * `POST {base}/v1/next_token_logprobs` with `{"source": [...], "prefix": [...]}`
//!   returns `{"logprobs": {"token": float, ...}}` covering the whole vocabulary.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Scorer, ScorerError, Vocab};
use crate::tokens::TokenSeq;

/// Accepted deviation of a remote distribution's total mass from 1.
pub const REMOTE_NORMALIZATION_TOLERANCE: f64 = 1e-4;

#[derive(Debug)]
pub struct HttpScorer {
    base: String,
    client: reqwest::blocking::Client,
    vocab: Vocab,
}

#[derive(Debug, Deserialize)]
struct VocabResponse {
    tokens: Vec<String>,
}

#[derive(Debug, Serialize)]
struct LogprobRequest<'a> {
    source: &'a [String],
    prefix: &'a [String],
}

#[derive(Debug, Deserialize)]
struct LogprobResponse {
    logprobs: HashMap<String, f64>,
}

fn remote(e: impl std::fmt::Display) -> ScorerError {
    ScorerError::Remote(e.to_string())
}

impl HttpScorer {
    /// Connects to `base` (e.g. `http://127.0.0.1:9000`) and fetches the vocabulary.
    pub fn connect(base: &str) -> Result<Self, ScorerError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(remote)?;
        let base = base.trim_end_matches('/').to_owned();
        let response: VocabResponse = client
            .get(format!("{base}/v1/vocab"))
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(remote)?;
        if response.tokens.is_empty() {
            return Err(ScorerError::Remote("empty vocabulary".into()));
        }
        Ok(Self {
            base,
            client,
            vocab: Vocab::new(response.tokens),
        })
    }
}

impl Scorer for HttpScorer {
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
        let response: LogprobResponse = self
            .client
            .post(format!("{}/v1/next_token_logprobs", self.base))
            .json(&LogprobRequest {
                source: source.tokens(),
                prefix,
            })
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(remote)?;

        let mut out = Vec::with_capacity(self.vocab.len());
        for token in self.vocab.tokens() {
            let lp = response.logprobs.get(token).copied().ok_or_else(|| {
                ScorerError::Remote(format!("response is missing token {token:?}"))
            })?;
            if lp.is_nan() || lp > 0.0 {
                return Err(ScorerError::Remote(format!(
                    "invalid log-probability {lp} for {token:?}"
                )));
            }
            out.push(lp.max(super::LOG_ZERO));
        }
        let total: f64 = out.iter().map(|lp| lp.exp()).sum();
        if (total - 1.0).abs() > REMOTE_NORMALIZATION_TOLERANCE {
            return Err(ScorerError::Normalization(total));
        }
        Ok(out)
    }
}
