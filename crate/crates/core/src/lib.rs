//! Segment-based interactive machine translation.
//!
//! The user validates any number of correct word segments in the current
//! hypothesis and corrects one word; the system regenerates a hypothesis that
//! keeps every validated segment and fills the gaps between them. This crate
//! provides the pieces of that loop:
//!
//! * [`scorer`]: next-token models ([`ToyScorerModel`], [`ScriptedScorer`],
//!   and [`HttpScorer`] for external services).
//! * [`decoder`]: greedy decoding and feedback-constrained decoding.
//! * [`simulator`]: a simulated user with a mouse/keyboard cost model.
//! * [`metrics`]: BLEU, TER, WSR, KSR and MAR.
//! * [`corpus_io`] and [`pipeline`]: corpora, logs, reports and corpus drivers.
//!
//! ```
//! use imt_core::{constrained_decode, DecoderConfig, Feedback, ScriptedScorer, TokenSeq, ValidatedSegment};
//!
//! let scorer = ScriptedScorer::new(["the red car stops"]);
//! let feedback = Feedback::new(vec![
//!     ValidatedSegment::validated(["the"]),
//!     ValidatedSegment::correction("blue"),
//! ]);
//! let hyp = constrained_decode(&scorer, &TokenSeq::source("el coche azul"), &feedback, &DecoderConfig::default())?;
//! assert_eq!(&hyp.tokens[..2], ["the", "blue"]);
//! # Ok::<(), imt_core::DecodeError>(())
//! ```

pub mod corpus_io;
pub mod decoder;
pub mod feedback;
pub mod hypothesis;
pub mod metrics;
pub mod pipeline;
pub mod scorer;
pub mod simulator;
pub mod tokens;

pub use decoder::{
    constrained_decode, decode, fill_gap, Anchor, DecodeError, DecoderConfig, GapFill,
};
pub use feedback::{Feedback, FeedbackViolation, SegmentKind, Slot, ValidatedSegment};
pub use hypothesis::{EffortTally, Hypothesis, Provenance};
pub use scorer::{
    next_token_log_dist, sequence_log_prob, HttpScorer, Scorer, ScorerError, ScriptedScorer,
    ToyScorerModel, Vocab, LOG_ZERO,
};
pub use simulator::{
    extract_feedback, lcs_match, run_session, CostModel, SessionLog, SessionRecord, SimConfig,
    SimError,
};
pub use tokens::{Side, TokenSeq, BOS, EOS, UNK};
