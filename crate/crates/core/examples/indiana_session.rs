//! Replays a recorded three-turn session with a scripted scorer and prints
//! the effort charged per turn.
//!
//!     cargo run -p imt-core --example indiana_session

use imt_core::metrics::effort_metrics;
use imt_core::{run_session, DecoderConfig, ScriptedScorer, SimConfig, TokenSeq};

const REFERENCE: &str = "Indiana was the first State to impose such a requirement.";

fn main() -> anyhow::Result<()> {
    let scorer = ScriptedScorer::new([
        "Indiana is the sooner State to impose that condition.",
        "Indiana was the sooner State to impose such a condition.",
        "Indiana was the first State to impose such a prerequisite.",
        REFERENCE,
    ]);
    let log = run_session(
        &scorer,
        &TokenSeq::source("Indiana fue el primer Estado en imponer tal requisito."),
        &TokenSeq::target(REFERENCE),
        &DecoderConfig::default(),
        &SimConfig::default(),
    )?;

    for (i, it) in log.iterations.iter().enumerate() {
        println!("turn {}: {}", i + 1, it.hypothesis_before.tokens);
        let segments: Vec<String> = it
            .feedback
            .segments
            .iter()
            .map(|s| {
                let words = s.words.join(" ");
                if s.is_correction() {
                    format!("<{words}>")
                } else {
                    format!("[{words}]")
                }
            })
            .collect();
        println!("  feedback {}", segments.join(" "));
        println!(
            "  ws={} ks={} ma={}",
            it.word_strokes(),
            it.key_strokes(),
            it.mouse_actions()
        );
    }
    println!("final:  {}", log.last_hypothesis);
    println!("accept: ma={}", log.acceptance.mouse_actions);
    let t = log.totals;
    println!(
        "totals: ws={} ks={} ma={}",
        t.word_strokes, t.key_strokes, t.mouse_actions
    );

    let r = effort_metrics(&[log.to_record()])?;
    println!("WSR {:.2}  KSR {:.2}  MAR {:.2}", r.wsr, r.ksr, r.mar);
    Ok(())
}
