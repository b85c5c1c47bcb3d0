use imt_core::{
    constrained_decode, decode, fill_gap, Anchor, DecoderConfig, Feedback, Provenance, Scorer,
    TokenSeq, ToyScorerModel, ValidatedSegment,
};
use imt_testkit::oracles::{
    contains_segments_in_order, exhaustive_gap, greedy_tail, skeleton_oracle,
};
use imt_testkit::scorers::{HashScorer, PositionScorer, RandomToy};
use imt_testkit::words;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn src() -> TokenSeq {
    TokenSeq::source("x y")
}

fn random_prefix(rng: &mut StdRng, tokens: &[String], max: usize) -> Vec<String> {
    let eos = imt_core::EOS;
    let alphabet: Vec<&String> = tokens.iter().filter(|t| *t != eos).collect();
    (0..rng.gen_range(0..=max))
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())].clone())
        .collect()
}

#[test]
fn gap_matches_exhaustive_search_on_position_scorers() {
    let mut rng = StdRng::seed_from_u64(7);
    for case in 0..200 {
        let n = rng.gen_range(1..=6);
        let max_gap = rng.gen_range(0..=3);
        let scorer = PositionScorer::random(&mut rng, n, 8);
        let prefix = random_prefix(&mut rng, scorer.vocab().tokens(), 3);
        let anchor = vec![scorer.vocab().token(rng.gen_range(0..n)).to_owned()];
        let config = DecoderConfig::with_max_gap(max_gap);
        let fill = fill_gap(
            &scorer,
            &src(),
            &prefix,
            Anchor::Segment(&anchor),
            100,
            &config,
        )
        .unwrap();
        let (tokens, score) = exhaustive_gap(&scorer, &src(), &prefix, &anchor[0], max_gap);
        assert_eq!(fill.tokens, tokens, "case {case}");
        assert_eq!(fill.anchored_logprob, score, "case {case}");
    }
}

#[test]
fn gap_matches_enumeration_over_three_tokens() {
    // Two words plus EOS, M = 2: 1 + 2 + 4 fillers (EOS is never a filler).
    let tokens = words("a b");
    let rows = vec![
        vec![(0.2f64).ln(), (0.5f64).ln(), (0.3f64).ln()],
        vec![(0.6f64).ln(), (0.1f64).ln(), (0.3f64).ln()],
        vec![(0.1f64).ln(), (0.8f64).ln(), (0.1f64).ln()],
    ];
    let scorer = PositionScorer::new(&tokens, rows);
    let config = DecoderConfig::with_max_gap(2);
    for anchor in ["a", "b"] {
        let anchor = vec![anchor.to_owned()];
        let fill = fill_gap(&scorer, &src(), &[], Anchor::Segment(&anchor), 10, &config).unwrap();
        let (best, score) = exhaustive_gap(&scorer, &src(), &[], &anchor[0], 2);
        assert_eq!(fill.tokens, best);
        assert!((fill.anchored_logprob - score).abs() < 1e-15);
    }
    // Anchor "b" scores .5 directly; the best two-word filler "b a" reaches .5 * .6 * .8.
    let anchor = words("b");
    let fill = fill_gap(&scorer, &src(), &[], Anchor::Segment(&anchor), 10, &config).unwrap();
    assert!(fill.tokens.is_empty());
    assert!((fill.anchored_logprob - 0.5f64.ln()).abs() < 1e-15);
}

/// Width-by-width greedy extension written independently of the library.
fn greedy_per_width<S: Scorer>(
    scorer: &S,
    prefix: &[String],
    anchor: &str,
    max_gap: usize,
) -> (Vec<String>, f64) {
    let vocab = scorer.vocab();
    let mut best: Option<(Vec<String>, f64)> = None;
    for width in 0..=max_gap {
        let mut ctx = prefix.to_vec();
        let mut gap = Vec::new();
        let mut score = 0.0;
        for _ in 0..width {
            let dist = scorer.next_token_logprobs(&src(), &ctx).unwrap();
            let mut pick = None;
            for (id, &lp) in dist.iter().enumerate() {
                if id != vocab.eos() && pick.is_none_or(|p: usize| lp > dist[p]) {
                    pick = Some(id);
                }
            }
            let pick = pick.unwrap();
            score += dist[pick];
            ctx.push(vocab.token(pick).to_owned());
            gap.push(vocab.token(pick).to_owned());
        }
        let dist = scorer.next_token_logprobs(&src(), &ctx).unwrap();
        score += dist[vocab.id(anchor).unwrap()];
        if best.as_ref().is_none_or(|(_, b)| score > *b) {
            best = Some((gap, score));
        }
    }
    best.unwrap()
}

#[test]
fn gap_matches_greedy_oracle_on_content_dependent_scorers() {
    let mut rng = StdRng::seed_from_u64(11);
    for case in 0..200 {
        let n = rng.gen_range(1..=6);
        let scorer = HashScorer::new(n, case);
        let max_gap = rng.gen_range(0..=4);
        let prefix = random_prefix(&mut rng, scorer.vocab().tokens(), 4);
        let anchor = vec![format!("w{}", rng.gen_range(0..n))];
        let config = DecoderConfig::with_max_gap(max_gap);
        let fill = fill_gap(
            &scorer,
            &src(),
            &prefix,
            Anchor::Segment(&anchor),
            100,
            &config,
        )
        .unwrap();
        let (tokens, score) = greedy_per_width(&scorer, &prefix, &anchor[0], max_gap);
        assert_eq!(fill.tokens, tokens, "case {case}");
        assert_eq!(fill.anchored_logprob, score, "case {case}");
    }
}

#[test]
fn budget_caps_gap_width() {
    let scorer = PositionScorer::new(
        &words("a b"),
        vec![vec![(0.9f64).ln(), (0.05f64).ln(), (0.05f64).ln()]],
    );
    let anchor = words("b");
    let config = DecoderConfig::with_max_gap(5);
    for budget in 0..4 {
        let fill = fill_gap(
            &scorer,
            &src(),
            &[],
            Anchor::Segment(&anchor),
            budget,
            &config,
        )
        .unwrap();
        assert!(fill.width() <= budget);
    }
}

#[test]
fn final_gap_is_greedy_to_end() {
    let mut rng = StdRng::seed_from_u64(3);
    for seed in 0..50 {
        let scorer = HashScorer::new(rng.gen_range(1..=5), seed);
        let prefix = random_prefix(&mut rng, scorer.vocab().tokens(), 3);
        let budget = rng.gen_range(0..8);
        let config = DecoderConfig::with_max_gap(1);
        let fill = fill_gap(&scorer, &src(), &prefix, Anchor::End, budget, &config).unwrap();
        assert_eq!(fill.tokens, greedy_tail(&scorer, &src(), &prefix, budget));
    }
}

#[test]
fn constrained_decode_matches_skeleton_enumeration() {
    // Three-token vocabulary, two segments, M = 2, L = 12.
    let mut rng = StdRng::seed_from_u64(5);
    let config = DecoderConfig {
        max_gap_len: 2,
        max_total_len: Some(12),
    };
    for _ in 0..100 {
        let scorer = PositionScorer::random(&mut rng, 2, 14);
        let alphabet = words("w0 w1");
        let mut segments = Vec::new();
        for _ in 0..2 {
            let len = rng.gen_range(1..=2);
            segments.push(
                (0..len)
                    .map(|_| alphabet[rng.gen_range(0..2)].clone())
                    .collect::<Vec<_>>(),
            );
        }
        let feedback = Feedback::new(
            segments
                .iter()
                .map(|s| ValidatedSegment::validated(s.clone()))
                .collect(),
        );
        let hyp = constrained_decode(&scorer, &src(), &feedback, &config).unwrap();
        let expected = skeleton_oracle(&scorer, &src(), &segments, 2, 12);
        assert_eq!(hyp.tokens.tokens(), expected);
        assert!(hyp.len() <= 12);
    }
}

#[test]
fn segments_survive_random_toy_decodes() {
    let mut rng = StdRng::seed_from_u64(2024);
    for case in 0..300 {
        let toy = RandomToy::generate(&mut rng, 5, 6);
        let source = toy.random_source(&mut rng, 5);
        let n = rng.gen_range(0..=3);
        let mut segments: Vec<Vec<String>> =
            (0..n).map(|_| toy.random_target(&mut rng, 1, 3)).collect();
        let mut fb: Vec<ValidatedSegment> = segments
            .iter()
            .map(|s| ValidatedSegment::validated(s.clone()))
            .collect();
        if rng.gen_bool(0.5) {
            let word = toy.random_target(&mut rng, 1, 1);
            let rank = rng.gen_range(0..=fb.len());
            fb.insert(rank, ValidatedSegment::correction(word[0].clone()));
            segments.insert(rank, word);
        }
        let config = DecoderConfig {
            max_gap_len: rng.gen_range(0..=4),
            max_total_len: Some(20),
        };
        let hyp = constrained_decode(&toy.model, &source, &Feedback::new(fb), &config).unwrap();
        assert!(
            contains_segments_in_order(hyp.tokens.tokens(), &segments),
            "case {case}"
        );
        let forced: usize = segments.iter().map(Vec::len).sum();
        assert_eq!(hyp.forced_count(), forced);
        assert!(hyp.len() <= 20);
        assert_eq!(hyp.token_logprobs.len(), hyp.len());
        assert!(hyp.token_logprobs.iter().all(|&lp| lp <= 0.0));
    }
}

#[test]
fn forced_tokens_are_marked_in_place() {
    let scorer = HashScorer::new(4, 9);
    let fb = Feedback::new(vec![
        ValidatedSegment::validated(words("w3 w3")),
        ValidatedSegment::correction("w1"),
    ]);
    let hyp = constrained_decode(&scorer, &src(), &fb, &DecoderConfig::default()).unwrap();
    let forced: Vec<&str> = hyp
        .tokens
        .iter()
        .zip(&hyp.provenance)
        .filter(|(_, p)| **p == Provenance::Forced)
        .map(|(t, _)| t.as_str())
        .collect();
    assert_eq!(forced, ["w3", "w3", "w1"]);
}

#[test]
fn empty_feedback_equals_plain_decode() {
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..100 {
        let toy = RandomToy::generate(&mut rng, 4, 5);
        let source = toy.random_source(&mut rng, 4);
        let config = DecoderConfig::with_max_gap(rng.gen_range(0..=5));
        let a = decode(&toy.model, &source, &config).unwrap();
        let b = constrained_decode(&toy.model, &source, &Feedback::default(), &config).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn greedy_decode_follows_stepwise_argmax() {
    let model = ToyScorerModel::load(imt_testkit::fixtures::toy_path("toy.model")).unwrap();
    let source = TokenSeq::source("el perro bebe agua .");
    let hyp = decode(&model, &source, &DecoderConfig::default()).unwrap();
    let vocab = model.vocab();
    let mut expected: Vec<String> = Vec::new();
    loop {
        let probs = model.next_token_probs(&source, &expected);
        let best = (0..probs.len()).fold(0, |b, i| if probs[i] > probs[b] { i } else { b });
        if best == vocab.eos()
            || expected.len() == DecoderConfig::default().max_len_for(source.len())
        {
            break;
        }
        expected.push(vocab.token(best).to_owned());
    }
    assert_eq!(hyp.tokens.tokens(), expected);
}
