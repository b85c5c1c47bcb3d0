//! Corpus BLEU and TER, and effort ratios from session logs.
//!
//!     cargo run -p imt-core --example metrics

use imt_core::metrics::{bleu, corpus_ter, effort_metrics, ter_edits};
use imt_core::simulator::SessionRecord;
use imt_core::{EffortTally, TokenSeq};

fn main() -> anyhow::Result<()> {
    let hyps = [
        TokenSeq::target("the cat sat on the mat"),
        TokenSeq::target("mat the on sat cat the"),
    ];
    let refs = [
        TokenSeq::target("the cat sat on the mat"),
        TokenSeq::target("the cat sat on the mat"),
    ];
    println!("BLEU {:.2}", bleu(&hyps, &refs)?);
    println!("TER  {:.2}", corpus_ter(&hyps, &refs)?);
    let e = ter_edits(&hyps[1], &refs[1]);
    println!(
        "second sentence: {} shifts, {} word edits",
        e.shifts, e.edits
    );

    let logs = [
        SessionRecord {
            source: TokenSeq::source("el gato").into_tokens(),
            reference: TokenSeq::target("the cat").into_tokens(),
            iterations: Vec::new(),
            totals: EffortTally::new(1, 3, 3),
        },
        SessionRecord {
            source: TokenSeq::source("hola").into_tokens(),
            reference: TokenSeq::target("hello").into_tokens(),
            iterations: Vec::new(),
            totals: EffortTally::new(0, 0, 1),
        },
    ];
    let r = effort_metrics(&logs)?;
    println!("WSR {:.2}  KSR {:.2}  MAR {:.2}", r.wsr, r.ksr, r.mar);
    Ok(())
}
