//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use imt_core::metrics::{bleu, effort_metrics, ter};
use imt_core::simulator::SessionRecord;
use imt_core::{
    constrained_decode, fill_gap, lcs_match, run_session, Anchor, DecoderConfig, EffortTally,
    Feedback, Scorer, SimConfig, TokenSeq, ValidatedSegment,
};
use imt_testkit::fixtures::{indiana_scorer, toy_path, INDIANA_REFERENCE, INDIANA_SOURCE};
use imt_testkit::oracles::{
    bleu_oracle, brute_lcs_len, contains_segments_in_order, exhaustive_gap, ter_greedy_oracle,
};
use imt_testkit::scorers::{PositionScorer, RandomToy};
use imt_testkit::words;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;

fn within(elapsed: Duration, limit: Duration, detail: String) -> Check {
    if elapsed < limit {
        Ok(format!(
            "{detail}; {:.3}s < {}s",
            elapsed.as_secs_f64(),
            limit.as_secs()
        ))
    } else {
        Err(format!(
            "{detail}; took {:.3}s, limit {}s",
            elapsed.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn indiana_replay() -> Check {
    let start = Instant::now();
    let log = run_session(
        &indiana_scorer(),
        &TokenSeq::source(INDIANA_SOURCE),
        &TokenSeq::target(INDIANA_REFERENCE),
        &DecoderConfig::default(),
        &SimConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let t = log.totals;
    let detail = format!(
        "ws={} ma={} ks={}",
        t.word_strokes, t.mouse_actions, t.key_strokes
    );
    if t != EffortTally::new(3, 20, 10) {
        return Err(format!("{detail}, expected ws=3 ma=10 ks=20"));
    }
    within(elapsed, Duration::from_secs(1), detail)
}

fn segment_inclusion() -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2);
    let mut violations = 0;
    for _ in 0..1000 {
        let toy = RandomToy::generate(&mut rng, 5, 7);
        let source = toy.random_source(&mut rng, 6);
        let mut segments: Vec<Vec<String>> = (0..rng.gen_range(0..=4))
            .map(|_| toy.random_target(&mut rng, 1, 3))
            .collect();
        let mut fb: Vec<ValidatedSegment> = segments
            .iter()
            .map(|s| ValidatedSegment::validated(s.clone()))
            .collect();
        if rng.gen_bool(0.7) {
            let word = toy.random_target(&mut rng, 1, 1);
            let rank = rng.gen_range(0..=fb.len());
            fb.insert(rank, ValidatedSegment::correction(word[0].clone()));
            segments.insert(rank, word);
        }
        let mut config = DecoderConfig::with_max_gap(rng.gen_range(0..=5));
        let forced: usize = segments.iter().map(Vec::len).sum();
        config.max_total_len = Some(config.max_len_for(source.len()).max(forced));
        let hyp = constrained_decode(&toy.model, &source, &Feedback::new(fb), &config)
            .map_err(|e| e.to_string())?;
        if !contains_segments_in_order(hyp.tokens.tokens(), &segments) {
            violations += 1;
        }
    }
    let detail = format!("1000 decodes, {violations} violations");
    if violations > 0 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(30), detail)
}

fn gap_oracle() -> Check {
    let start = Instant::now();
    let source = TokenSeq::source("x");
    let mut rng = StdRng::seed_from_u64(3);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let max_gap = rng.gen_range(0..=3);
        let scorer = PositionScorer::random(&mut rng, n, 8);
        let prefix: Vec<String> = (0..rng.gen_range(0..=3))
            .map(|_| format!("w{}", rng.gen_range(0..n)))
            .collect();
        let anchor = vec![scorer.vocab().token(rng.gen_range(0..n)).to_owned()];
        let fill = fill_gap(
            &scorer,
            &source,
            &prefix,
            Anchor::Segment(&anchor),
            100,
            &DecoderConfig::with_max_gap(max_gap),
        )
        .map_err(|e| e.to_string())?;
        let (tokens, score) = exhaustive_gap(&scorer, &source, &prefix, &anchor[0], max_gap);
        if fill.tokens != tokens || fill.anchored_logprob != score {
            mismatches += 1;
        }
    }
    let detail = format!("200 cases, {mismatches} mismatches");
    if mismatches > 0 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(30), detail)
}

fn lcs_oracle() -> Check {
    let mut rng = StdRng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..500 {
        let k = rng.gen_range(1..=5);
        let mut sentence = || -> Vec<String> {
            (0..rng.gen_range(0..=8))
                .map(|_| format!("{}", rng.gen_range(0..k)))
                .collect()
        };
        let (a, b) = (sentence(), sentence());
        if lcs_match(&a, &b).len() != brute_lcs_len(&a, &b) {
            mismatches += 1;
        }
    }
    if mismatches > 0 {
        Err(format!("{mismatches} of 500 differ"))
    } else {
        Ok("500 cases exact".into())
    }
}

fn session_progress() -> Check {
    let mut rng = StdRng::seed_from_u64(5);
    let mut max_iter = 0;
    for case in 0..100 {
        let toy = RandomToy::generate(&mut rng, 5, 6);
        let source = toy.random_source(&mut rng, 6);
        let reference = toy.random_target(&mut rng, 1, 8);
        let reference = TokenSeq::new(reference, imt_core::Side::Target).unwrap();
        let log = run_session(
            &toy.model,
            &source,
            &reference,
            &DecoderConfig::default(),
            &SimConfig::default(),
        )
        .map_err(|e| format!("case {case}: {e}"))?;
        let mut proposals: Vec<&[String]> = log
            .iterations
            .iter()
            .map(|it| it.hypothesis_before.tokens.tokens())
            .collect();
        proposals.push(log.last_hypothesis.tokens());
        let lcs: Vec<usize> = proposals
            .iter()
            .map(|h| lcs_match(h, &reference).len())
            .collect();
        if lcs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(format!(
                "case {case}: LCS sequence {lcs:?} not strictly increasing"
            ));
        }
        if log.iterations.len() > reference.len() {
            return Err(format!(
                "case {case}: {} iterations for {} words",
                log.iterations.len(),
                reference.len()
            ));
        }
        if log.final_hypothesis != reference || lcs.last() != Some(&reference.len()) {
            return Err(format!("case {case}: did not reach the reference"));
        }
        max_iter = max_iter.max(log.iterations.len());
    }
    Ok(format!(
        "100 sessions converge, at most {max_iter} iterations"
    ))
}

fn metric_oracles() -> Check {
    let mut rng = StdRng::seed_from_u64(6);
    let mut sentence = |min: usize| -> Vec<String> {
        (0..rng.gen_range(min..=7))
            .map(|_| ["a", "b", "c", "d"][rng.gen_range(0..4)].to_owned())
            .collect()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let hyps = vec![sentence(0), sentence(0)];
        let refs = vec![sentence(1), sentence(1)];
        let b = bleu(&hyps, &refs).map_err(|e| e.to_string())?;
        worst = worst.max((b - bleu_oracle(&hyps, &refs)).abs());
        let (shifts, edits) = ter_greedy_oracle(&hyps[0], &refs[0]);
        let t = ter(&hyps[0], &refs[0]).map_err(|e| e.to_string())?;
        worst = worst.max((t - 100.0 * (shifts + edits) as f64 / refs[0].len() as f64).abs());
    }
    if worst >= 1e-6 {
        return Err(format!("max deviation {worst:e}"));
    }
    let corpus = vec![words("the cat sat"), words("on the mat")];
    let (ib, it) = (
        bleu(&corpus, &corpus).unwrap(),
        ter(&corpus[0], &corpus[0]).unwrap(),
    );
    if (ib - 100.0).abs() > 1e-9 || it != 0.0 {
        return Err(format!("identity gives BLEU {ib} TER {it}"));
    }
    let record = SessionRecord {
        source: words(INDIANA_SOURCE),
        reference: words(INDIANA_REFERENCE),
        iterations: Vec::new(),
        totals: EffortTally::new(3, 20, 10),
    };
    let r = effort_metrics(&[record]).unwrap();
    if r.wsr != 30.0 || r.ksr != 2000.0 / 57.0 || r.mar != 1000.0 / 57.0 {
        return Err(format!("effort ratios {r:?}"));
    }
    Ok(format!(
        "200 cases, max deviation {worst:.1e}; identity 100/0; WSR {} KSR {:.3} MAR {:.3}",
        r.wsr, r.ksr, r.mar
    ))
}

fn simulate_cli(dir: &std::path::Path, tag: &str) -> Result<(Vec<u8>, Vec<u8>, Duration), String> {
    let (report, log) = (
        dir.join(format!("report{tag}.json")),
        dir.join(format!("log{tag}.jsonl")),
    );
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_imt"))
        .arg("simulate")
        .arg("--src")
        .arg(toy_path("toy.es"))
        .arg("--tgt")
        .arg(toy_path("toy.en"))
        .arg("--model")
        .arg(toy_path("toy.model"))
        .arg("--out")
        .arg(&report)
        .arg("--log")
        .arg(&log)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(format!(
            "imt simulate failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let read = |p: &std::path::Path| std::fs::read(p).map_err(|e| e.to_string());
    Ok((read(&report)?, read(&log)?, elapsed))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (r1, l1, _) = simulate_cli(dir.path(), "1")?;
    let (r2, l2, _) = simulate_cli(dir.path(), "2")?;
    if r1 != r2 || l1 != l2 {
        return Err("reruns differ".into());
    }
    Ok(format!(
        "report {} bytes and logs {} bytes identical",
        r1.len(),
        l1.len()
    ))
}

fn end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (report, log, elapsed) = simulate_cli(dir.path(), "")?;
    let v: serde_json::Value = serde_json::from_slice(&report).map_err(|e| e.to_string())?;
    let mut shown = Vec::new();
    for key in ["bleu", "ter", "wsr", "ksr", "mar"] {
        let x = v[key]
            .as_f64()
            .ok_or_else(|| format!("report lacks {key}"))?;
        shown.push(format!("{key}={x:.2}"));
    }
    let sessions = String::from_utf8_lossy(&log).lines().count();
    if v["sentences"] != 20 || sessions != 20 {
        return Err(format!("{sessions} sessions logged"));
    }
    within(
        elapsed,
        Duration::from_secs(10),
        format!("20 sentences, {}", shown.join(" ")),
    )
}

type Criterion = fn() -> Check;

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("worked-example replay: 3 ws, 10 ma, 20 ks", indiana_replay),
        (
            "segment inclusion over 1000 constrained decodes",
            segment_inclusion,
        ),
        ("gap search equals exhaustive enumeration", gap_oracle),
        ("LCS equals brute-force subsequence search", lcs_oracle),
        (
            "simulated sessions make progress and converge",
            session_progress,
        ),
        ("BLEU/TER/effort metrics match oracles", metric_oracles),
        ("simulate reruns are byte-identical", determinism),
        ("bundled 20-sentence corpus end to end", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({reason})", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
