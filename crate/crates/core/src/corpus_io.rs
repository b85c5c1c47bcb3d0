//! Parallel corpora, session logs and metric reports on disk.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::simulator::SessionRecord;
use crate::tokens::{Side, TokenSeq};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line count {source_lines} != {target_lines}")]
    LineCountMismatch {
        source_lines: usize,
        target_lines: usize,
    },
    #[error("empty line at line {line} of {path}")]
    EmptyLine { path: String, line: usize },
    #[error("extra field at line {0}")]
    ExtraField(usize),
    #[error("missing tab-separated target at line {0}")]
    MissingField(usize),
    #[error("malformed session log at line {line}: {message}")]
    MalformedLog { line: usize, message: String },
    #[error("corpus is empty")]
    Empty,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    pub lowercase: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub name: String,
    pub pairs: Vec<(TokenSeq, TokenSeq)>,
}

impl ParallelCorpus {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = &TokenSeq> {
        self.pairs.iter().map(|(s, _)| s)
    }

    pub fn references(&self) -> impl Iterator<Item = &TokenSeq> {
        self.pairs.iter().map(|(_, r)| r)
    }
}

/// NFC-normalizes, optionally lowercases, and splits on whitespace.
pub fn tokenize_line(line: &str, side: Side, options: LoadOptions) -> TokenSeq {
    let normalized: String = line.nfc().collect();
    if options.lowercase {
        TokenSeq::tokenize(&normalized.to_lowercase(), side)
    } else {
        TokenSeq::tokenize(&normalized, side)
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let file = File::open(path).map_err(io_err(path))?;
    BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(io_err(path))
}

fn corpus_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads a pair of sentence-aligned files, one sentence per line.
pub fn load_parallel(
    source_path: impl AsRef<Path>,
    target_path: impl AsRef<Path>,
    options: LoadOptions,
) -> Result<ParallelCorpus, CorpusError> {
    let (source_path, target_path) = (source_path.as_ref(), target_path.as_ref());
    let sources = read_lines(source_path)?;
    let targets = read_lines(target_path)?;
    if sources.len() != targets.len() {
        return Err(CorpusError::LineCountMismatch {
            source_lines: sources.len(),
            target_lines: targets.len(),
        });
    }
    let mut pairs = Vec::with_capacity(sources.len());
    for (i, (src, tgt)) in sources.iter().zip(&targets).enumerate() {
        let src = tokenize_line(src, Side::Source, options);
        let tgt = tokenize_line(tgt, Side::Target, options);
        for (seq, path) in [(&src, source_path), (&tgt, target_path)] {
            if seq.is_empty() {
                return Err(CorpusError::EmptyLine {
                    path: path.display().to_string(),
                    line: i + 1,
                });
            }
        }
        pairs.push((src, tgt));
    }
    Ok(ParallelCorpus {
        name: corpus_name(source_path),
        pairs,
    })
}

/// Reads `source<TAB>target` lines.
pub fn load_tsv(
    path: impl AsRef<Path>,
    options: LoadOptions,
) -> Result<ParallelCorpus, CorpusError> {
    let path = path.as_ref();
    let mut pairs = Vec::new();
    for (i, line) in read_lines(path)?.iter().enumerate() {
        let line_no = i + 1;
        let mut fields = line.split('\t');
        let src = fields.next().unwrap_or_default();
        let tgt = fields.next().ok_or(CorpusError::MissingField(line_no))?;
        if fields.next().is_some() {
            return Err(CorpusError::ExtraField(line_no));
        }
        let src = tokenize_line(src, Side::Source, options);
        let tgt = tokenize_line(tgt, Side::Target, options);
        if src.is_empty() || tgt.is_empty() {
            return Err(CorpusError::EmptyLine {
                path: path.display().to_string(),
                line: line_no,
            });
        }
        pairs.push((src, tgt));
    }
    Ok(ParallelCorpus {
        name: corpus_name(path),
        pairs,
    })
}

/// Reads one sentence per line. Empty lines are an error.
pub fn load_sentences(
    path: impl AsRef<Path>,
    side: Side,
    options: LoadOptions,
) -> Result<Vec<TokenSeq>, CorpusError> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(CorpusError::Empty);
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let seq = tokenize_line(l, side, options);
            if seq.is_empty() {
                Err(CorpusError::EmptyLine {
                    path: path.display().to_string(),
                    line: i + 1,
                })
            } else {
                Ok(seq)
            }
        })
        .collect()
}

pub fn session_logs_to_string(logs: &[SessionRecord]) -> String {
    let mut out = String::new();
    for log in logs {
        out.push_str(&serde_json::to_string(log).expect("session records always serialize"));
        out.push('\n');
    }
    out
}

pub fn write_session_logs(
    logs: &[SessionRecord],
    path: impl AsRef<Path>,
) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(session_logs_to_string(logs).as_bytes())
        .and_then(|_| writer.flush())
        .map_err(io_err(path))
}

/// Appends one record as a JSON line.
pub fn append_session_log(log: &SessionRecord, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let line = serde_json::to_string(log).expect("session records always serialize");
    writeln!(file, "{line}").map_err(io_err(path))
}

pub fn parse_session_logs(text: &str) -> Result<Vec<SessionRecord>, CorpusError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CorpusError::MalformedLog {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_session_logs(path: impl AsRef<Path>) -> Result<Vec<SessionRecord>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_session_logs(&text)
}

/// Corpus-level report of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub bleu: f64,
    pub ter: f64,
    pub wsr: f64,
    pub ksr: f64,
    pub mar: f64,
    pub sentences: usize,
}

impl Report {
    pub const CSV_HEADER: &'static str = "bleu,ter,wsr,ksr,mar,sentences";

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{}\n{},{},{},{},{},{}\n",
            Self::CSV_HEADER,
            self.bleu,
            self.ter,
            self.wsr,
            self.ksr,
            self.mar,
            self.sentences
        )
    }
}

/// Report of translation quality only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub bleu: f64,
    pub ter: f64,
    pub sentences: usize,
}

impl QualityReport {
    pub const CSV_HEADER: &'static str = "bleu,ter,sentences";

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{}\n{},{},{}\n",
            Self::CSV_HEADER,
            self.bleu,
            self.ter,
            self.sentences
        )
    }
}
