//! Decoding around validated segments and a correction.
//!
//!     cargo run -p imt-core --example constrained_decode

use std::path::Path;

use imt_core::{
    constrained_decode, decode, DecoderConfig, Feedback, Provenance, TokenSeq, ToyScorerModel,
    ValidatedSegment,
};

fn main() -> anyhow::Result<()> {
    let model = ToyScorerModel::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy.model"))?;
    let source = TokenSeq::source("la niña tiene un gato negro .");
    let config = DecoderConfig::default();

    let first = decode(&model, &source, &config)?;
    println!("initial:     {}", first.tokens);

    // Keep "the girl", type "black" somewhere after it, keep the final ".".
    let feedback = Feedback::new(vec![
        ValidatedSegment::validated(["the", "girl"]),
        ValidatedSegment::correction("black"),
        ValidatedSegment::validated(["."]),
    ]);
    let next = constrained_decode(&model, &source, &feedback, &config)?;
    let marked: Vec<String> = next
        .tokens
        .iter()
        .zip(&next.provenance)
        .map(|(t, p)| match p {
            Provenance::Forced => format!("[{t}]"),
            Provenance::Generated => t.clone(),
        })
        .collect();
    println!("constrained: {}", marked.join(" "));

    for m in [0, 1, 3] {
        let hyp = constrained_decode(&model, &source, &feedback, &DecoderConfig::with_max_gap(m))?;
        println!("M = {m}:       {}", hyp.tokens);
    }
    Ok(())
}
