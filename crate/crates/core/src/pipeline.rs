//! Corpus-level drivers: translate, simulate and tune the gap length.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus_io::{ParallelCorpus, QualityReport, Report};
use crate::decoder::{decode, DecodeError, DecoderConfig};
use crate::hypothesis::Hypothesis;
use crate::metrics::{bleu, corpus_ter, effort_metrics, MetricError};
use crate::scorer::Scorer;
use crate::simulator::{run_session, SessionLog, SessionRecord, SimConfig, SimError};
use crate::tokens::TokenSeq;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("sentence {index}: {source}")]
    Session {
        index: usize,
        #[source]
        source: SimError,
    },
    #[error("sentence {index}: {source}")]
    Decode {
        index: usize,
        #[source]
        source: DecodeError,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("empty gap range {0}..{1}")]
    EmptyRange(usize, usize),
}

/// Greedy translations of every source, in input order.
pub fn translate_all<S: Scorer + ?Sized>(
    scorer: &S,
    sources: &[TokenSeq],
    config: &DecoderConfig,
) -> Result<Vec<Hypothesis>, PipelineError> {
    sources
        .par_iter()
        .enumerate()
        .map(|(index, src)| {
            decode(scorer, src, config).map_err(|source| PipelineError::Decode { index, source })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub report: Report,
    pub logs: Vec<SessionLog>,
}

impl SimulationOutput {
    pub fn records(&self) -> Vec<SessionRecord> {
        self.logs.iter().map(SessionLog::to_record).collect()
    }
}

/// Runs one simulated session per sentence pair and scores the run: BLEU and
/// TER of the initial hypotheses, WSR/KSR/MAR of the full sessions.
/// Sessions run in parallel; results keep corpus order.
pub fn simulate_corpus<S: Scorer + ?Sized>(
    scorer: &S,
    corpus: &ParallelCorpus,
    decoder_config: &DecoderConfig,
    sim_config: &SimConfig,
) -> Result<SimulationOutput, PipelineError> {
    let logs: Vec<SessionLog> = corpus
        .pairs
        .par_iter()
        .enumerate()
        .map(|(index, (src, reference))| {
            run_session(scorer, src, reference, decoder_config, sim_config)
                .map_err(|source| PipelineError::Session { index, source })
        })
        .collect::<Result<_, _>>()?;

    let initial: Vec<&[String]> = logs.iter().map(|l| l.initial_hypothesis.tokens()).collect();
    let references: Vec<&[String]> = logs.iter().map(|l| l.reference.tokens()).collect();
    let records: Vec<SessionRecord> = logs.iter().map(SessionLog::to_record).collect();
    let effort = effort_metrics(&records)?;

    Ok(SimulationOutput {
        report: Report {
            bleu: bleu(&initial, &references)?,
            ter: corpus_ter(&initial, &references)?,
            wsr: effort.wsr,
            ksr: effort.ksr,
            mar: effort.mar,
            sentences: logs.len(),
        },
        logs,
    })
}

pub fn quality_report(
    hypotheses: &[TokenSeq],
    references: &[TokenSeq],
) -> Result<QualityReport, PipelineError> {
    Ok(QualityReport {
        bleu: bleu(hypotheses, references)?,
        ter: corpus_ter(hypotheses, references)?,
        sentences: hypotheses.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapScore {
    pub max_gap: usize,
    pub ksr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub best: usize,
    pub scores: Vec<GapScore>,
}

/// Simulates the corpus for every `M` in `range` and keeps the one with the
/// lowest KSR; ties go to the smallest `M`.
pub fn tune_gap<S: Scorer + ?Sized>(
    scorer: &S,
    corpus: &ParallelCorpus,
    range: RangeInclusive<usize>,
    base: &DecoderConfig,
    sim_config: &SimConfig,
) -> Result<TuneResult, PipelineError> {
    if range.is_empty() {
        return Err(PipelineError::EmptyRange(*range.start(), *range.end()));
    }
    let mut scores = Vec::new();
    for max_gap in range {
        let config = DecoderConfig {
            max_gap_len: max_gap,
            ..*base
        };
        let out = simulate_corpus(scorer, corpus, &config, sim_config)?;
        scores.push(GapScore {
            max_gap,
            ksr: out.report.ksr,
        });
    }
    let best = scores
        .iter()
        .fold(None::<&GapScore>, |best, s| match best {
            Some(b) if b.ksr <= s.ksr => Some(b),
            _ => Some(s),
        })
        .map(|s| s.max_gap)
        .expect("range is non-empty");
    Ok(TuneResult { best, scores })
}
