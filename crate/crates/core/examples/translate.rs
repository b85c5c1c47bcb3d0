//! Greedy translation of the bundled Spanish sentences with the toy model.
//!
//!     cargo run -p imt-core --example translate

use std::path::Path;

use imt_core::corpus_io::{load_sentences, LoadOptions};
use imt_core::pipeline::translate_all;
use imt_core::{DecoderConfig, Side, ToyScorerModel};

fn main() -> anyhow::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let model = ToyScorerModel::load(data.join("toy.model"))?;
    let sources = load_sentences(data.join("toy.es"), Side::Source, LoadOptions::default())?;

    let hyps = translate_all(&model, &sources, &DecoderConfig::default())?;
    for (src, hyp) in sources.iter().zip(&hyps) {
        println!(
            "{src}\n  -> {}  (log p = {:.2})",
            hyp.tokens,
            hyp.log_prob()
        );
    }
    Ok(())
}
