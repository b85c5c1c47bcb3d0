//! Brute-force counterparts of the library algorithms.

use std::collections::{HashSet, VecDeque};

use imt_core::{Scorer, TokenSeq, LOG_ZERO};

/// True if `needle` is a (not necessarily contiguous) subsequence of `hay`.
pub fn is_subsequence<T: PartialEq>(needle: &[T], hay: &[T]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// LCS length by enumerating every subset of `a`.
pub fn brute_lcs_len<T: PartialEq + Clone>(a: &[T], b: &[T]) -> usize {
    assert!(a.len() <= 16, "subset enumeration is exponential");
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let picked: Vec<T> = (0..a.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| a[i].clone())
            .collect();
        if is_subsequence(&picked, b) {
            best = size;
        }
    }
    best
}

fn logprob_of<S: Scorer>(scorer: &S, source: &TokenSeq, prefix: &[String], token: &str) -> f64 {
    let dist = scorer.next_token_logprobs(source, prefix).unwrap();
    scorer.vocab().id(token).map_or(LOG_ZERO, |id| dist[id])
}

/// The best inner-gap filler found by enumerating every candidate of length
/// `0..=max_width` over the non-EOS vocabulary. Each candidate is scored as
/// the sum of its token log-probabilities plus that of `anchor`. Ties go to
/// the shorter candidate, then to the lexicographically smaller id sequence.
pub fn exhaustive_gap<S: Scorer>(
    scorer: &S,
    source: &TokenSeq,
    prefix: &[String],
    anchor: &str,
    max_width: usize,
) -> (Vec<String>, f64) {
    let vocab = scorer.vocab();
    let alphabet: Vec<String> = vocab
        .tokens()
        .iter()
        .enumerate()
        .filter(|&(id, _)| id != vocab.eos())
        .map(|(_, t)| t.clone())
        .collect();
    let mut best: Option<(Vec<String>, f64)> = None;
    for width in 0..=max_width {
        let count = alphabet.len().pow(width as u32);
        for code in 0..count {
            let mut candidate = Vec::with_capacity(width);
            let mut rest = code;
            for _ in 0..width {
                candidate.push(alphabet[rest % alphabet.len()].clone());
                rest /= alphabet.len();
            }
            candidate.reverse();
            let mut context = prefix.to_vec();
            let mut score = 0.0;
            for token in &candidate {
                score += logprob_of(scorer, source, &context, token);
                context.push(token.clone());
            }
            score += logprob_of(scorer, source, &context, anchor);
            if best.as_ref().is_none_or(|(_, b)| score > *b) {
                best = Some((candidate, score));
            }
        }
    }
    best.expect("width 0 always exists")
}

/// Plain greedy continuation until EOS or `budget` tokens.
pub fn greedy_tail<S: Scorer>(
    scorer: &S,
    source: &TokenSeq,
    prefix: &[String],
    budget: usize,
) -> Vec<String> {
    let vocab = scorer.vocab();
    let mut context = prefix.to_vec();
    let mut out = Vec::new();
    while out.len() < budget {
        let dist = scorer.next_token_logprobs(source, &context).unwrap();
        let mut best = 0;
        for (id, &lp) in dist.iter().enumerate() {
            if lp > dist[best] {
                best = id;
            }
        }
        if best == vocab.eos() {
            break;
        }
        context.push(vocab.token(best).to_owned());
        out.push(vocab.token(best).to_owned());
    }
    out
}

/// Reference constrained decode: each inner gap is the exhaustive best
/// filler for its anchor, the tail is greedy.
pub fn skeleton_oracle<S: Scorer>(
    scorer: &S,
    source: &TokenSeq,
    segments: &[Vec<String>],
    max_gap: usize,
    max_len: usize,
) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut remaining: usize = segments.iter().map(Vec::len).sum();
    for seg in segments {
        let budget = (max_len - out.len() - remaining).min(max_gap);
        let (gap, _) = exhaustive_gap(scorer, source, &out, &seg[0], budget);
        out.extend(gap);
        out.extend(seg.iter().cloned());
        remaining -= seg.len();
    }
    let tail = greedy_tail(scorer, source, &out, max_len - out.len());
    out.extend(tail);
    out
}

/// True if every segment occurs contiguously in `output`, in order and
/// without overlap (leftmost matching is sufficient for this).
pub fn contains_segments_in_order(output: &[String], segments: &[Vec<String>]) -> bool {
    let mut from = 0;
    for seg in segments {
        match (from..output.len()).find(|&i| output[i..].starts_with(seg)) {
            Some(i) => from = i + seg.len(),
            None => return false,
        }
    }
    true
}

/// Levenshtein distance with a full table.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in t[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t[a.len()][b.len()]
}

fn grams(tokens: &[String], n: usize) -> Vec<String> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n)
        .map(|i| tokens[i..i + n].join("\u{1}"))
        .collect()
}

/// Corpus BLEU straight from the definition: clipped n-gram precision for
/// n = 1..4 (orders with no hypothesis n-grams skipped), geometric mean,
/// brevity penalty, scaled to 0..100.
pub fn bleu_oracle(hyps: &[Vec<String>], refs: &[Vec<String>]) -> f64 {
    let mut log_p = Vec::new();
    for n in 1..=4 {
        let (mut clipped, mut total) = (0usize, 0usize);
        for (h, r) in hyps.iter().zip(refs) {
            let hg = grams(h, n);
            let rg = grams(r, n);
            let mut seen = Vec::new();
            for g in &hg {
                if seen.contains(g) {
                    continue;
                }
                seen.push(g.clone());
                let in_h = hg.iter().filter(|x| *x == g).count();
                let in_r = rg.iter().filter(|x| *x == g).count();
                clipped += in_h.min(in_r);
            }
            total += hg.len();
        }
        if total == 0 {
            continue;
        }
        if clipped == 0 {
            return 0.0;
        }
        log_p.push((clipped as f64 / total as f64).ln());
    }
    let c: usize = hyps.iter().map(Vec::len).sum();
    let r: usize = refs.iter().map(Vec::len).sum();
    if c == 0 {
        return 0.0;
    }
    let bp = if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    100.0 * bp * (log_p.iter().sum::<f64>() / log_p.len() as f64).exp()
}

fn move_block<T: Clone>(seq: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let mut rest: Vec<T> = seq[..start]
        .iter()
        .chain(&seq[start + len..])
        .cloned()
        .collect();
    let block: Vec<T> = seq[start..start + len].to_vec();
    let tail = rest.split_off(dest);
    rest.into_iter().chain(block).chain(tail).collect()
}

/// Greedy-shift TER edits `(shifts, edits)`: repeatedly apply the block move
/// (block also present in the reference, at most 10 words) with the largest
/// strict decrease of the edit distance; first found wins.
pub fn ter_greedy_oracle(hyp: &[String], reference: &[String]) -> (usize, usize) {
    let mut cur = hyp.to_vec();
    let mut shifts = 0;
    loop {
        let base = levenshtein(&cur, reference);
        let mut best: Option<(usize, Vec<String>)> = None;
        for start in 0..cur.len() {
            for len in 1..=10.min(cur.len() - start) {
                let block = &cur[start..start + len];
                let in_ref = (0..reference.len()).any(|k| reference[k..].starts_with(block));
                if !in_ref {
                    continue;
                }
                for dest in 0..=cur.len() - len {
                    if dest == start {
                        continue;
                    }
                    let cand = move_block(&cur, start, len, dest);
                    let d = levenshtein(&cand, reference);
                    if d < base && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, cand));
                    }
                }
            }
        }
        match best {
            Some((_, cand)) => {
                cur = cand;
                shifts += 1;
            }
            None => return (shifts, base),
        }
    }
}

/// The minimum over all edit scripts of `shifts + word edits`, where a shift
/// moves any contiguous block anywhere. Breadth-first over shift sequences.
pub fn min_ter_edits(hyp: &[String], reference: &[String]) -> usize {
    let mut best = levenshtein(hyp, reference);
    let mut seen: HashSet<Vec<String>> = HashSet::from([hyp.to_vec()]);
    let mut queue = VecDeque::from([(hyp.to_vec(), 0usize)]);
    while let Some((cur, k)) = queue.pop_front() {
        if k + 1 >= best {
            continue;
        }
        for start in 0..cur.len() {
            for len in 1..=cur.len() - start {
                for dest in 0..=cur.len() - len {
                    let cand = move_block(&cur, start, len, dest);
                    if seen.insert(cand.clone()) {
                        best = best.min(k + 1 + levenshtein(&cand, reference));
                        queue.push_back((cand, k + 1));
                    }
                }
            }
        }
    }
    best
}
