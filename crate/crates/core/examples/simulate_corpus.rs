//! Simulated-user evaluation of the bundled corpus: quality of the first
//! hypotheses and the effort needed to reach the references.
//!
//!     cargo run -p imt-core --example simulate_corpus [-- MAX_GAP]

use std::path::Path;

use imt_core::corpus_io::{load_parallel, LoadOptions};
use imt_core::pipeline::simulate_corpus;
use imt_core::{DecoderConfig, SimConfig, ToyScorerModel};

fn main() -> anyhow::Result<()> {
    let max_gap = match std::env::args().nth(1) {
        Some(arg) => arg.parse()?,
        None => DecoderConfig::DEFAULT_MAX_GAP,
    };
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let model = ToyScorerModel::load(data.join("toy.model"))?;
    let corpus = load_parallel(
        data.join("toy.es"),
        data.join("toy.en"),
        LoadOptions::default(),
    )?;

    let out = simulate_corpus(
        &model,
        &corpus,
        &DecoderConfig::with_max_gap(max_gap),
        &SimConfig::default(),
    )?;
    let r = &out.report;
    println!("M = {max_gap}, {} sentences", r.sentences);
    println!("BLEU {:.2}  TER {:.2}", r.bleu, r.ter);
    println!("WSR {:.2}  KSR {:.2}  MAR {:.2}", r.wsr, r.ksr, r.mar);

    let hardest = out
        .logs
        .iter()
        .max_by_key(|l| l.iterations.len())
        .expect("corpus is not empty");
    println!(
        "\nlongest session ({} turns): {}",
        hardest.iterations.len(),
        hardest.reference
    );
    for it in &hardest.iterations {
        println!("  {}", it.hypothesis_before.tokens);
    }
    Ok(())
}
