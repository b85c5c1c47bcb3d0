//! User feedback: validated segments, the one-word correction, and the
//! hypothesis skeleton they induce.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokens::EOS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Validated,
    Correction,
}

/// A run of target words the user has fixed in place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValidatedSegment {
    pub words: Vec<String>,
    pub kind: SegmentKind,
    /// Inclusive 0-based span into the reference. Only the simulator knows it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_span: Option<(usize, usize)>,
}

impl ValidatedSegment {
    pub fn validated<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            words: words.into_iter().map(Into::into).collect(),
            kind: SegmentKind::Validated,
            ref_span: None,
        }
    }

    pub fn correction(word: impl Into<String>) -> Self {
        Self {
            words: vec![word.into()],
            kind: SegmentKind::Correction,
            ref_span: None,
        }
    }

    pub fn with_ref_span(mut self, start: usize, end: usize) -> Self {
        self.ref_span = Some((start, end));
        self
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_correction(&self) -> bool {
        self.kind == SegmentKind::Correction
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedbackViolation {
    #[error("empty segment at rank {0}")]
    EmptySegment(usize),
    #[error("overlap between segments {0} and {1}")]
    Overlap(usize, usize),
    #[error("reference span of segment {0} is inverted or does not match its length")]
    BadSpan(usize),
    #[error("multiple corrections (segments {0} and {1})")]
    MultipleCorrections(usize, usize),
    #[error("correction segment {0} must hold exactly one word")]
    CorrectionLength(usize),
    #[error("segment {0} contains the end-of-sentence marker")]
    ContainsEos(usize),
    #[error("segment {index} contains an invalid token {token:?}")]
    BadToken { index: usize, token: String },
}

/// The ordered, non-overlapping segments the user handed back this turn.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Feedback {
    pub segments: Vec<ValidatedSegment>,
}

/// One position of the hypothesis skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot<'a> {
    /// A free region the decoder fills; numbered 0..=N.
    Gap(usize),
    Forced(&'a ValidatedSegment),
}

impl Feedback {
    pub fn new(segments: Vec<ValidatedSegment>) -> Self {
        Self { segments }
    }

    pub fn n(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn correction(&self) -> Option<&ValidatedSegment> {
        self.segments.iter().find(|s| s.is_correction())
    }

    pub fn forced_len(&self) -> usize {
        self.segments.iter().map(ValidatedSegment::len).sum()
    }

    /// Returns the first violated invariant.
    pub fn validate(&self) -> Result<(), FeedbackViolation> {
        let mut correction_at = None;
        let mut last_span: Option<(usize, (usize, usize))> = None;
        for (index, segment) in self.segments.iter().enumerate() {
            if segment.is_empty() {
                return Err(FeedbackViolation::EmptySegment(index));
            }
            for token in &segment.words {
                if token == EOS {
                    return Err(FeedbackViolation::ContainsEos(index));
                }
                if token.is_empty() || token.chars().any(char::is_whitespace) {
                    return Err(FeedbackViolation::BadToken {
                        index,
                        token: token.clone(),
                    });
                }
            }
            if segment.is_correction() {
                if segment.len() != 1 {
                    return Err(FeedbackViolation::CorrectionLength(index));
                }
                if let Some(first) = correction_at {
                    return Err(FeedbackViolation::MultipleCorrections(first, index));
                }
                correction_at = Some(index);
            }
            if let Some((start, end)) = segment.ref_span {
                if end < start || end - start + 1 != segment.len() {
                    return Err(FeedbackViolation::BadSpan(index));
                }
                if let Some((prev, (_, prev_end))) = last_span {
                    if start <= prev_end {
                        return Err(FeedbackViolation::Overlap(prev, index));
                    }
                }
                last_span = Some((index, (start, end)));
            }
        }
        Ok(())
    }

    /// Interleaves gaps with the forced segments: `[gap_0, f_1, gap_1, ..., f_N, gap_N]`.
    pub fn compose_skeleton(&self) -> Vec<Slot<'_>> {
        let mut slots = Vec::with_capacity(2 * self.segments.len() + 1);
        slots.push(Slot::Gap(0));
        for (n, segment) in self.segments.iter().enumerate() {
            slots.push(Slot::Forced(segment));
            slots.push(Slot::Gap(n + 1));
        }
        slots
    }
}

impl FromIterator<ValidatedSegment> for Feedback {
    fn from_iter<T: IntoIterator<Item = ValidatedSegment>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1_iteration1() -> Feedback {
        Feedback::new(vec![
            ValidatedSegment::validated(["Indiana"]).with_ref_span(0, 0),
            ValidatedSegment::correction("was").with_ref_span(1, 1),
            ValidatedSegment::validated(["State", "to", "impose"]).with_ref_span(4, 6),
        ])
    }

    #[test]
    fn empty_feedback_is_a_single_gap() {
        assert_eq!(Feedback::default().compose_skeleton(), vec![Slot::Gap(0)]);
    }

    #[test]
    fn figure_feedback_skeleton() {
        let fb = fig1_iteration1();
        assert_eq!(fb.validate(), Ok(()));
        let slots = fb.compose_skeleton();
        assert_eq!(
            slots,
            vec![
                Slot::Gap(0),
                Slot::Forced(&fb.segments[0]),
                Slot::Gap(1),
                Slot::Forced(&fb.segments[1]),
                Slot::Gap(2),
                Slot::Forced(&fb.segments[2]),
                Slot::Gap(3),
            ]
        );
    }

    #[test]
    fn whole_reference_segment() {
        let fb = Feedback::new(vec![ValidatedSegment::validated(["a", "b", "c"])]);
        assert_eq!(fb.compose_skeleton().len(), 3);
    }

    #[test]
    fn violations() {
        let overlap = Feedback::new(vec![
            ValidatedSegment::validated(["a", "b"]).with_ref_span(0, 1),
            ValidatedSegment::validated(["b", "c"]).with_ref_span(1, 2),
        ]);
        assert_eq!(overlap.validate(), Err(FeedbackViolation::Overlap(0, 1)));
        assert!(overlap
            .validate()
            .unwrap_err()
            .to_string()
            .contains("overlap"));

        let empty = Feedback::new(vec![ValidatedSegment::validated(Vec::<String>::new())]);
        assert_eq!(empty.validate(), Err(FeedbackViolation::EmptySegment(0)));
        assert!(empty
            .validate()
            .unwrap_err()
            .to_string()
            .contains("empty segment"));

        let two = Feedback::new(vec![
            ValidatedSegment::correction("a"),
            ValidatedSegment::correction("b"),
        ]);
        assert_eq!(
            two.validate(),
            Err(FeedbackViolation::MultipleCorrections(0, 1))
        );

        let long = Feedback::new(vec![ValidatedSegment {
            words: vec!["a".into(), "b".into()],
            kind: SegmentKind::Correction,
            ref_span: None,
        }]);
        assert_eq!(long.validate(), Err(FeedbackViolation::CorrectionLength(0)));

        let eos = Feedback::new(vec![ValidatedSegment::validated(["a", EOS])]);
        assert_eq!(eos.validate(), Err(FeedbackViolation::ContainsEos(0)));
    }

    proptest! {
        #[test]
        fn skeleton_preserves_order(lens in proptest::collection::vec(1usize..4, 0..6)) {
            let fb: Feedback = lens
                .iter()
                .enumerate()
                .map(|(i, &l)| ValidatedSegment::validated((0..l).map(|j| format!("w{i}_{j}"))))
                .collect();
            let slots = fb.compose_skeleton();
            let gaps = slots.iter().filter(|s| matches!(s, Slot::Gap(_))).count();
            let forced: Vec<&ValidatedSegment> = slots
                .iter()
                .filter_map(|s| match s {
                    Slot::Forced(seg) => Some(*seg),
                    Slot::Gap(_) => None,
                })
                .collect();
            prop_assert_eq!(gaps, fb.n() + 1);
            prop_assert_eq!(forced.len(), fb.n());
            for (a, b) in forced.iter().zip(&fb.segments) {
                prop_assert_eq!(*a, b);
            }
        }
    }
}
