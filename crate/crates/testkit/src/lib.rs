//! Slow, obviously-correct reference implementations and fixtures used by the
//! test suites. Nothing here is tuned for speed.

pub mod fixtures;
pub mod oracles;
pub mod scorers;

/// Whitespace tokenization into owned strings.
pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}
