//! The `imt` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.
//!
//! Any flag may also come from a flat `key=value` file given with
//! `--config`, where keys are long flag names without dashes. Flags on the
//! command line win over the file, and the file wins over `IMT_MODEL_PATH`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand};
use imt_core::corpus_io::{
    load_parallel, load_sentences, load_tsv, session_logs_to_string, LoadOptions, ParallelCorpus,
};
use imt_core::pipeline::{quality_report, simulate_corpus, translate_all, tune_gap};
use imt_core::{DecoderConfig, HttpScorer, Scorer, Side, SimConfig, ToyScorerModel};

use crate::session::{self, AppState, ServiceConfig};

#[derive(Debug, Parser)]
#[command(
    name = "imt",
    version,
    about = "Segment-based interactive machine translation"
)]
pub struct Cli {
    /// Flat key=value file with default flag values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Translate sentences greedily, one hypothesis per line on stdout.
    Translate(TranslateArgs),
    /// Run simulated-user sessions over a parallel corpus and report metrics.
    Simulate(SimulateArgs),
    /// Score hypotheses against references with BLEU and TER.
    Score(ScoreArgs),
    /// Pick the maximum gap length that minimizes KSR on a development corpus.
    TuneGap(TuneGapArgs),
    /// Serve the live session API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("scorer").required(true).args(["model", "scorer_url"])))]
pub struct ModelArgs {
    /// Toy model file.
    #[arg(long, env = "IMT_MODEL_PATH", value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Base URL of an external scorer service.
    #[arg(long, value_name = "URL")]
    pub scorer_url: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Maximum length of a generated gap between validated segments.
    #[arg(long, default_value_t = DecoderConfig::DEFAULT_MAX_GAP)]
    pub max_gap: usize,
    /// Hard cap on hypothesis length (default: twice the source length plus 5).
    #[arg(long)]
    pub max_len: Option<usize>,
}

impl DecodeArgs {
    fn config(&self) -> DecoderConfig {
        DecoderConfig {
            max_gap_len: self.max_gap,
            max_total_len: self.max_len,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("corpus").required(true).args(["src", "tsv"])))]
pub struct CorpusArgs {
    /// Source side, one sentence per line.
    #[arg(long, requires = "tgt", value_name = "FILE")]
    pub src: Option<PathBuf>,
    /// Reference side, aligned with --src.
    #[arg(long, requires = "src", value_name = "FILE")]
    pub tgt: Option<PathBuf>,
    /// Tab-separated source and reference per line.
    #[arg(long, conflicts_with_all = ["src", "tgt"], value_name = "FILE")]
    pub tsv: Option<PathBuf>,
    /// Lowercase both sides after normalization.
    #[arg(long)]
    pub lowercase: bool,
}

impl CorpusArgs {
    fn load(&self) -> anyhow::Result<ParallelCorpus> {
        let options = LoadOptions {
            lowercase: self.lowercase,
        };
        Ok(match (&self.src, &self.tgt, &self.tsv) {
            (Some(src), Some(tgt), _) => load_parallel(src, tgt, options)?,
            (_, _, Some(tsv)) => load_tsv(tsv, options)?,
            _ => unreachable!("clap enforces the corpus group"),
        })
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("dev").required(true).args(["dev_src", "dev_tsv"])))]
pub struct DevCorpusArgs {
    #[arg(long, requires = "dev_tgt", value_name = "FILE")]
    pub dev_src: Option<PathBuf>,
    #[arg(long, requires = "dev_src", value_name = "FILE")]
    pub dev_tgt: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["dev_src", "dev_tgt"], value_name = "FILE")]
    pub dev_tsv: Option<PathBuf>,
    #[arg(long)]
    pub lowercase: bool,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// Source sentences, one per line.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long)]
    pub lowercase: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub decode: DecodeArgs,
    /// Give up on a sentence after this many feedback turns.
    #[arg(long, default_value_t = SimConfig::default().max_iterations)]
    pub max_iterations: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the report as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Write one JSON session log per line.
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_name = "FILE")]
    pub hyp: PathBuf,
    #[arg(long = "ref", value_name = "FILE")]
    pub reference: PathBuf,
    #[arg(long)]
    pub lowercase: bool,
    /// Print CSV instead of JSON.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct TuneGapArgs {
    #[command(flatten)]
    pub corpus: DevCorpusArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Inclusive range of gap lengths, e.g. `0..5`.
    #[arg(long, value_name = "A..B", value_parser = parse_range)]
    pub max_gap_range: GapRange,
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub decode: DecodeArgs,
    /// Append accepted sessions to this JSONL file.
    #[arg(long, value_name = "FILE")]
    pub persist: Option<PathBuf>,
    /// Allowed browser origin; repeat for several. Any origin if omitted.
    #[arg(long, value_name = "ORIGIN")]
    pub cors_origin: Vec<String>,
    /// Drop sessions idle for this many minutes.
    #[arg(long, default_value_t = 30)]
    pub idle_minutes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapRange {
    pub start: usize,
    pub end: usize,
}

fn parse_range(s: &str) -> Result<GapRange, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    let range = GapRange {
        start: parse(a)?,
        end: parse(b)?,
    };
    if range.start > range.end {
        return Err(format!("empty range {s}: start exceeds end"));
    }
    Ok(range)
}

/// A failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Data(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

/// Parses `key=value` lines; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        map.insert(key.trim().to_owned(), value.trim().to_owned());
    }
    Ok(map)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Inserts flags from the config file right after the subcommand, skipping
/// any flag already present on the command line.
fn apply_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse_config(&text).map_err(CliError::Usage)?;

    let command = Cli::command();
    let Some(pos) = args
        .iter()
        .position(|a| command.find_subcommand(&*a.to_string_lossy()).is_some())
    else {
        return Ok(args);
    };
    let sub = command
        .find_subcommand(&*args[pos].to_string_lossy())
        .expect("found above");

    let mut extra = Vec::new();
    for (key, value) in entries {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| {
                CliError::Usage(format!("unknown config key {key:?} for {}", sub.get_name()))
            })?;
        let flag = format!("--{key}");
        let given = args.iter().any(|a| {
            a.to_string_lossy() == flag || a.to_string_lossy().starts_with(&format!("{flag}="))
        });
        if given {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(OsString::from(format!("{flag}={value}")));
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => extra.push(OsString::from(flag)),
                "false" | "no" | "0" => {}
                _ => {
                    return Err(CliError::Usage(format!(
                        "config key {key:?} expects true or false"
                    )))
                }
            }
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, extra);
    Ok(out)
}

fn load_scorer(args: &ModelArgs) -> anyhow::Result<Arc<dyn Scorer>> {
    match (&args.model, &args.scorer_url) {
        (Some(path), _) => {
            let model = ToyScorerModel::load(path)
                .with_context(|| format!("loading model {}", path.display()))?;
            Ok(Arc::new(model))
        }
        (None, Some(url)) => {
            let scorer =
                HttpScorer::connect(url).with_context(|| format!("connecting to scorer {url}"))?;
            Ok(Arc::new(scorer))
        }
        (None, None) => unreachable!("clap enforces the scorer group"),
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn translate(args: &TranslateArgs, out: &mut dyn std::io::Write) -> anyhow::Result<()> {
    let options = LoadOptions {
        lowercase: args.lowercase,
    };
    let sources = load_sentences(&args.input, Side::Source, options)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let scorer = load_scorer(&args.model)?;
    let hyps = translate_all(&*scorer, &sources, &args.decode.config())?;
    for h in hyps {
        writeln!(out, "{}", h.tokens.detokenize())?;
    }
    Ok(())
}

fn simulate(args: &SimulateArgs, out: &mut dyn std::io::Write) -> anyhow::Result<()> {
    let corpus = args.corpus.load()?;
    let scorer = load_scorer(&args.model)?;
    let sim = SimConfig {
        max_iterations: args.max_iterations,
        ..SimConfig::default()
    };
    let result = simulate_corpus(&*scorer, &corpus, &args.decode.config(), &sim)?;
    if let Some(path) = &args.log {
        write_file(path, &session_logs_to_string(&result.records()))?;
    }
    if let Some(path) = &args.csv {
        write_file(path, &result.report.to_csv())?;
    }
    let json = result.report.to_json();
    match &args.out {
        Some(path) => write_file(path, &format!("{json}\n"))?,
        None => writeln!(out, "{json}")?,
    }
    Ok(())
}

fn score(args: &ScoreArgs, out: &mut dyn std::io::Write) -> anyhow::Result<()> {
    let options = LoadOptions {
        lowercase: args.lowercase,
    };
    let read = |p: &PathBuf, side| {
        load_sentences(p, side, options).with_context(|| format!("reading {}", p.display()))
    };
    let hyps = read(&args.hyp, Side::Target)?;
    let refs = read(&args.reference, Side::Target)?;
    let report = quality_report(&hyps, &refs)?;
    if args.csv {
        write!(out, "{}", report.to_csv())?;
    } else {
        writeln!(out, "{}", report.to_json())?;
    }
    Ok(())
}

fn tune(args: &TuneGapArgs, out: &mut dyn std::io::Write) -> anyhow::Result<()> {
    let c = &args.corpus;
    let options = LoadOptions {
        lowercase: c.lowercase,
    };
    let corpus = match (&c.dev_src, &c.dev_tgt, &c.dev_tsv) {
        (Some(src), Some(tgt), _) => load_parallel(src, tgt, options)?,
        (_, _, Some(tsv)) => load_tsv(tsv, options)?,
        _ => unreachable!("clap enforces the dev corpus group"),
    };
    let scorer = load_scorer(&args.model)?;
    let base = DecoderConfig {
        max_total_len: args.max_len,
        ..DecoderConfig::default()
    };
    let range = args.max_gap_range.start..=args.max_gap_range.end;
    let result = tune_gap(&*scorer, &corpus, range, &base, &SimConfig::default())?;
    writeln!(out, "{}", serde_json::to_string(&result)?)?;
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let scorer = load_scorer(&args.model)?;
    let config = ServiceConfig {
        decoder: args.decode.config(),
        idle_timeout: Duration::from_secs(args.idle_minutes.saturating_mul(60)),
        persist: args.persist.clone(),
        cors_origins: args.cors_origin.clone(),
        ..ServiceConfig::default()
    };
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("bad address {}:{}: {e}", args.host, args.port)))?;
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Usage(format!("cannot listen on {addr}: {e}")))?;
        tracing::info!(%addr, "serving");
        eprintln!(
            "listening on http://{}",
            listener.local_addr().map_err(anyhow::Error::from)?
        );
        session::serve(listener, AppState::new(scorer, config))
            .await
            .map_err(|e| CliError::Data(e.into()))
    })
}

/// Runs the command line, writing normal output to `out`.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = apply_config(args.into_iter().map(Into::into).collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}").map_err(anyhow::Error::from)?;
            return Ok(());
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.strip_prefix("error: ").unwrap_or(&text).trim_end();
            return Err(CliError::Usage(text.to_owned()));
        }
    };
    match &cli.command {
        Command::Translate(a) => translate(a, out)?,
        Command::Simulate(a) => simulate(a, out)?,
        Command::Score(a) => score(a, out)?,
        Command::TuneGap(a) => tune(a, out)?,
        Command::Serve(a) => serve(a)?,
    }
    Ok(())
}
