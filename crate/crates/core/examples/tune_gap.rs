//! Choosing the maximum gap length on a development corpus.
//!
//!     cargo run -p imt-core --example tune_gap

use std::path::Path;

use imt_core::corpus_io::{load_tsv, LoadOptions};
use imt_core::pipeline::tune_gap;
use imt_core::{DecoderConfig, SimConfig, ToyScorerModel};

fn main() -> anyhow::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let model = ToyScorerModel::load(data.join("toy.model"))?;
    let dev = load_tsv(data.join("toy.tsv"), LoadOptions::default())?;

    let result = tune_gap(
        &model,
        &dev,
        0..=6,
        &DecoderConfig::default(),
        &SimConfig::default(),
    )?;
    for s in &result.scores {
        let mark = if s.max_gap == result.best {
            " <- best"
        } else {
            ""
        };
        println!("M = {}  KSR {:.2}{mark}", s.max_gap, s.ksr);
    }
    Ok(())
}
