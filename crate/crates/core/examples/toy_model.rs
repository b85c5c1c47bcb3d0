//! Building, saving and reloading a toy model, and inspecting its
//! next-token distributions.
//!
//!     cargo run -p imt-core --example toy_model

use imt_core::{next_token_log_dist, sequence_log_prob, TokenSeq, ToyScorerModel, EOS};

fn main() -> anyhow::Result<()> {
    let model = ToyScorerModel::new(
        0.5,
        0.1,
        [
            ("casa", "house", 0.7),
            ("casa", "home", 0.3),
            ("roja", "red", 1.0),
        ],
        [
            ("<s>", "the", 1.0),
            ("the", "red", 0.6),
            ("the", "house", 0.4),
            ("red", "house", 1.0),
            ("house", EOS, 1.0),
        ],
    )?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("tiny.model");
    model.save(&path)?;
    println!("{}", std::fs::read_to_string(&path)?);
    let model = ToyScorerModel::load(&path)?;

    let source = TokenSeq::source("casa roja");
    for prefix in [
        vec![],
        vec!["the".to_owned()],
        vec!["the".to_owned(), "red".to_owned()],
    ] {
        let dist = next_token_log_dist(&model, &source, &prefix)?;
        let shown: Vec<String> = dist
            .iter()
            .map(|(t, lp)| format!("{t}={:.3}", lp.exp()))
            .collect();
        println!("after {:?}: {}", prefix, shown.join(" "));
    }
    let target: Vec<String> = ["the", "red", "house", EOS].map(String::from).to_vec();
    println!(
        "log p(the red house) = {:.4}",
        sequence_log_prob(&model, &source, &target)?
    );
    Ok(())
}
