//! The Indiana session and the bundled toy corpus.

use std::path::PathBuf;

use imt_core::ScriptedScorer;

pub const INDIANA_SOURCE: &str = "Indiana fue el primer Estado en imponer tal requisito.";
pub const INDIANA_REFERENCE: &str = "Indiana was the first State to impose such a requirement.";

/// The three hypotheses the system proposes, followed by the reference that
/// the final turn converges to.
pub const INDIANA_HYPOTHESES: [&str; 4] = [
    "Indiana is the sooner State to impose that condition.",
    "Indiana was the sooner State to impose such a condition.",
    "Indiana was the first State to impose such a prerequisite.",
    INDIANA_REFERENCE,
];

pub fn indiana_scorer() -> ScriptedScorer {
    ScriptedScorer::new(INDIANA_HYPOTHESES)
}

/// Directory holding `toy.es`, `toy.en`, `toy.tsv` and `toy.model`.
pub fn toy_data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data")
}

pub fn toy_path(file: &str) -> PathBuf {
    toy_data_dir().join(file)
}
