//! Translating with an external scorer service.
//!
//! The service must answer `GET /v1/vocab` with `{"tokens": [...]}` and
//! `POST /v1/next_token_logprobs` (`{"source": [...], "prefix": [...]}`)
//! with `{"logprobs": {"token": float, ...}}` over the whole vocabulary.
//!
//!     cargo run -p imt-core --example remote_scorer -- http://127.0.0.1:9000 "la casa es grande ."

use anyhow::Context;
use imt_core::{decode, DecoderConfig, HttpScorer, TokenSeq};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let url = args.next().context("usage: remote_scorer URL [SENTENCE]")?;
    let sentence = args
        .next()
        .unwrap_or_else(|| "la casa es grande .".to_owned());

    let scorer = HttpScorer::connect(&url).with_context(|| format!("connecting to {url}"))?;
    let hyp = decode(
        &scorer,
        &TokenSeq::source(&sentence),
        &DecoderConfig::default(),
    )?;
    println!("{}", hyp.tokens);
    Ok(())
}
