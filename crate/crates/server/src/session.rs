//! Live interactive sessions over HTTP+JSON.
//!
//! | method | path                          | body                         |
//! |--------|-------------------------------|------------------------------|
//! | GET    | `/api/health`                 |                              |
//! | POST   | `/api/sessions`               | `{"source", "reference"?}`   |
//! | GET    | `/api/sessions/{id}`          |                              |
//! | POST   | `/api/sessions/{id}/feedback` | `{"spans", "correction"?, "merges"?}` |
//! | POST   | `/api/sessions/{id}/accept`   |                              |
//!
//! Spans are inclusive `[start, end]` token ranges of the current hypothesis,
//! ordered and disjoint. `correction` is `{"after_segment_rank", "word"}`:
//! the corrected word goes after that many spans. `merges` lists span ranks
//! `r` whose span is joined with span `r + 1`, deleting the words between.
//! Effort is charged with the same [`CostModel`] the simulated user pays.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use imt_core::corpus_io::{append_session_log, tokenize_line, LoadOptions};
use imt_core::metrics::{effort_metrics, EffortRatios};
use imt_core::simulator::{IterationEntry, IterationRecord, SessionRecord};
use imt_core::{
    constrained_decode, decode, CostModel, DecodeError, DecoderConfig, EffortTally, Feedback,
    Hypothesis, Provenance, Scorer, Side, TokenSeq, ValidatedSegment, BOS, EOS,
};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub decoder: DecoderConfig,
    pub costs: CostModel,
    /// Sessions untouched for this long are dropped.
    pub idle_timeout: Duration,
    /// JSONL file that accepted sessions are appended to.
    pub persist: Option<PathBuf>,
    /// Allowed browser origins; empty allows any origin.
    pub cors_origins: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            decoder: DecoderConfig::default(),
            costs: CostModel::default(),
            idle_timeout: DEFAULT_IDLE_TIMEOUT,
            persist: None,
            cors_origins: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionState {
    Open,
    Accepted,
}

#[derive(Debug, Clone)]
pub struct LiveSession {
    pub id: String,
    pub source: TokenSeq,
    pub reference: Option<TokenSeq>,
    pub current: Hypothesis,
    pub accumulated: EffortTally,
    pub history: Vec<IterationRecord>,
    pub state: SessionState,
    last_used: Instant,
}

impl LiveSession {
    fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            state: self.state,
            source: self.source.tokens().to_vec(),
            reference: self.reference.as_ref().map(|r| r.tokens().to_vec()),
            hypothesis: self.current.tokens.tokens().to_vec(),
            provenance: self.current.provenance.clone(),
            totals: self.accumulated,
            iterations: self.history.len(),
            matches_reference: self
                .reference
                .as_ref()
                .map(|r| r.tokens() == self.current.tokens.tokens()),
        }
    }

    /// The session as a log record whose reference is the accepted translation.
    pub fn record(&self) -> SessionRecord {
        SessionRecord {
            source: self.source.tokens().to_vec(),
            reference: self.current.tokens.tokens().to_vec(),
            iterations: self
                .history
                .iter()
                .map(|it| IterationEntry {
                    feedback: it.feedback.clone(),
                    ma: it.effort.mouse_actions,
                    ks: it.effort.key_strokes,
                    ws: it.effort.word_strokes,
                })
                .collect(),
            totals: self.accumulated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub state: SessionState,
    pub source: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<String>>,
    pub hypothesis: Vec<String>,
    pub provenance: Vec<Provenance>,
    pub totals: EffortTally,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matches_reference: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackResponse {
    #[serde(flatten)]
    pub session: SessionView,
    /// Effort charged for this call alone.
    pub charged: EffortTally,
    /// The user validated the whole hypothesis without correcting anything;
    /// nothing was re-decoded and the session is ready to accept.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptResponse {
    #[serde(flatten)]
    pub session: SessionView,
    pub charged: EffortTally,
    /// Effort ratios against the accepted translation; absent when it is empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<EffortRatios>,
    pub record: SessionRecord,
}

/// Raw text (tokenized on whitespace) or a token array.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TextInput {
    Text(String),
    Tokens(Vec<String>),
}

impl TextInput {
    fn into_seq(self, side: Side) -> Result<TokenSeq, ApiError> {
        match self {
            TextInput::Text(text) => Ok(tokenize_line(&text, side, LoadOptions::default())),
            TextInput::Tokens(tokens) => TokenSeq::new(tokens, side)
                .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateRequest {
    pub source: TextInput,
    #[serde(default)]
    pub reference: Option<TextInput>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
pub struct FeedbackRequest {
    #[serde(default)]
    pub spans: Vec<[usize; 2]>,
    #[serde(default)]
    pub correction: Option<Correction>,
    #[serde(default)]
    pub merges: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct Correction {
    pub after_segment_rank: usize,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    fn internal(message: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Self::new(r.status(), r.body_text())
    }
}

impl From<DecodeError> for ApiError {
    fn from(e: DecodeError) -> Self {
        match e {
            DecodeError::Feedback(v) => Self::unprocessable(v.to_string()),
            DecodeError::ForcedTooLong { .. } => Self::unprocessable(e.to_string()),
            other => Self::internal(other),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(serde_json::json!({ "error": self.message })),
        )
            .into_response()
    }
}

/// Converts span-based feedback on `current` into decoder feedback and the
/// effort it costs.
///
/// A span is charged a selection only if it holds at least one generated
/// token; re-selecting words that are already fixed is free.
pub fn convert_feedback(
    current: &Hypothesis,
    request: &FeedbackRequest,
    costs: &CostModel,
) -> Result<(Feedback, EffortTally), ApiError> {
    let spans = &request.spans;
    if spans.is_empty() && request.correction.is_none() {
        return Err(ApiError::unprocessable(
            "feedback has neither spans nor a correction",
        ));
    }
    for (rank, &[start, end]) in spans.iter().enumerate() {
        if start > end || end >= current.len() {
            return Err(ApiError::unprocessable(format!(
                "span {rank} [{start}, {end}] is outside the hypothesis of length {}",
                current.len()
            )));
        }
    }
    for (rank, pair) in spans.windows(2).enumerate() {
        if pair[1][0] <= pair[0][1] {
            return Err(ApiError::unprocessable(format!(
                "spans {rank} and {} overlap or are out of order",
                rank + 1
            )));
        }
    }
    for (i, &m) in request.merges.iter().enumerate() {
        if m + 1 >= spans.len() {
            return Err(ApiError::unprocessable(format!(
                "merge {m} has no following span"
            )));
        }
        if i > 0 && request.merges[i - 1] >= m {
            return Err(ApiError::unprocessable(
                "merges must be strictly increasing",
            ));
        }
    }
    if let Some(c) = &request.correction {
        if c.after_segment_rank > spans.len() {
            return Err(ApiError::unprocessable(format!(
                "correction rank {} exceeds the {} spans",
                c.after_segment_rank,
                spans.len()
            )));
        }
        if c.after_segment_rank > 0 && request.merges.contains(&(c.after_segment_rank - 1)) {
            return Err(ApiError::unprocessable(
                "correction falls inside a merged segment",
            ));
        }
        if c.word.is_empty()
            || c.word.chars().any(char::is_whitespace)
            || c.word == EOS
            || c.word == BOS
        {
            return Err(ApiError::unprocessable(format!(
                "invalid correction word {:?}",
                c.word
            )));
        }
    }

    let tokens = current.tokens.tokens();
    let mut effort = EffortTally::default();
    // Each group is a run of merged spans: (first span rank, words).
    let mut groups: Vec<(usize, Vec<String>)> = Vec::new();
    for (rank, &[start, end]) in spans.iter().enumerate() {
        if current.provenance[start..=end].contains(&Provenance::Generated) {
            effort.mouse_actions += costs.selection(end - start + 1);
        }
        let words = tokens[start..=end].iter().cloned();
        if rank > 0 && request.merges.contains(&(rank - 1)) {
            effort.mouse_actions += costs.merge(start - spans[rank - 1][1] - 1);
            groups
                .last_mut()
                .expect("merge follows a span")
                .1
                .extend(words);
        } else {
            groups.push((rank, words.collect()));
        }
    }

    let mut segments: Vec<ValidatedSegment> = groups
        .iter()
        .map(|(_, words)| ValidatedSegment::validated(words.clone()))
        .collect();
    if let Some(c) = &request.correction {
        effort += costs.correction(&c.word);
        let at = groups
            .iter()
            .filter(|(rank, _)| *rank < c.after_segment_rank)
            .count();
        segments.insert(at, ValidatedSegment::correction(c.word.clone()));
    }
    Ok((Feedback::new(segments), effort))
}

struct Inner {
    scorer: Arc<dyn Scorer>,
    config: ServiceConfig,
    sessions: std::sync::Mutex<HashMap<String, Arc<Mutex<LiveSession>>>>,
    next_id: AtomicU64,
    persist_lock: Mutex<()>,
}

/// Shared service state: the scorer and every live session.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(scorer: Arc<dyn Scorer>, config: ServiceConfig) -> Self {
        Self(Arc::new(Inner {
            scorer,
            config,
            sessions: Default::default(),
            next_id: AtomicU64::new(1),
            persist_lock: Mutex::new(()),
        }))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.0.config
    }

    pub fn session_count(&self) -> usize {
        self.0
            .sessions
            .lock()
            .expect("session table poisoned")
            .len()
    }

    fn lookup(&self, id: &str) -> Result<Arc<Mutex<LiveSession>>, ApiError> {
        self.0
            .sessions
            .lock()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))
    }

    /// Drops sessions idle since before `now - idle_timeout`. Sessions in the
    /// middle of a call are kept. Returns how many were dropped.
    pub fn evict_idle(&self, now: Instant) -> usize {
        let timeout = self.0.config.idle_timeout;
        let mut table = self.0.sessions.lock().expect("session table poisoned");
        let before = table.len();
        table.retain(|_, session| match session.try_lock() {
            Ok(s) => now.saturating_duration_since(s.last_used) < timeout,
            Err(_) => true,
        });
        before - table.len()
    }

    fn decoder_config(
        &self,
        source: &TokenSeq,
        reference: Option<&TokenSeq>,
        forced: usize,
    ) -> DecoderConfig {
        let base = self.0.config.decoder;
        let floor = reference.map_or(0, |r| r.len()).max(forced);
        DecoderConfig {
            max_total_len: Some(base.max_len_for(source.len()).max(floor)),
            ..base
        }
    }
}

/// Builds the HTTP router.
pub fn router(state: AppState) -> Router {
    let origins = &state.config().cors_origins;
    let cors = if origins.is_empty() {
        CorsLayer::new().allow_origin(Any)
    } else {
        let list: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
        CorsLayer::new().allow_origin(AllowOrigin::list(list))
    }
    .allow_methods(Any)
    .allow_headers(Any);

    Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/feedback", post(submit_feedback))
        .route("/api/sessions/{id}/accept", post(accept_session))
        .layer(cors)
        .with_state(state)
}

/// Serves until Ctrl-C, evicting idle sessions once a minute.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    let evictor = state.clone();
    let sweep = tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let dropped = evictor.evict_idle(Instant::now());
            if dropped > 0 {
                tracing::info!(dropped, "evicted idle sessions");
            }
        }
    });
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    sweep.abort();
    result
}

async fn run_blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, DecodeError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(ApiError::internal)?
        .map_err(ApiError::from)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let Json(request) = body?;
    let source = request.source.into_seq(Side::Source)?;
    if source.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "source is empty"));
    }
    let reference = request
        .reference
        .map(|r| r.into_seq(Side::Target))
        .transpose()?;

    let scorer = state.0.scorer.clone();
    let config = state.decoder_config(&source, reference.as_ref(), 0);
    let src = source.clone();
    let hypothesis = run_blocking(move || decode(&*scorer, &src, &config)).await?;

    let id = format!("s{}", state.0.next_id.fetch_add(1, Ordering::Relaxed));
    let session = LiveSession {
        id: id.clone(),
        source,
        reference,
        current: hypothesis,
        accumulated: EffortTally::default(),
        history: Vec::new(),
        state: SessionState::Open,
        last_used: Instant::now(),
    };
    let view = session.view();
    state
        .0
        .sessions
        .lock()
        .expect("session table poisoned")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    tracing::debug!(%id, "session created");
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let session = state.lookup(&id)?;
    let mut session = session.lock().await;
    session.last_used = Instant::now();
    Ok(Json(session.view()))
}

fn ensure_open(session: &LiveSession) -> Result<(), ApiError> {
    match session.state {
        SessionState::Open => Ok(()),
        SessionState::Accepted => Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("session {} is already accepted", session.id),
        )),
    }
}

async fn submit_feedback(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<FeedbackRequest>, JsonRejection>,
) -> Result<Json<FeedbackResponse>, ApiError> {
    let session = state.lookup(&id)?;
    let mut session = session.lock().await;
    session.last_used = Instant::now();
    ensure_open(&session)?;
    let Json(request) = body?;

    let (feedback, charged) = convert_feedback(&session.current, &request, &state.config().costs)?;
    let whole = request.spans.len() == 1
        && request.spans[0] == [0, session.current.len().saturating_sub(1)];
    if request.correction.is_none() && whole && request.merges.is_empty() {
        return Ok(Json(FeedbackResponse {
            session: session.view(),
            charged: EffortTally::default(),
            complete: true,
        }));
    }

    let scorer = state.0.scorer.clone();
    let config = state.decoder_config(
        &session.source,
        session.reference.as_ref(),
        feedback.forced_len(),
    );
    let source = session.source.clone();
    let fb = feedback.clone();
    let next = run_blocking(move || constrained_decode(&*scorer, &source, &fb, &config)).await?;

    let before = std::mem::replace(&mut session.current, next);
    session.history.push(IterationRecord {
        hypothesis_before: before,
        feedback,
        effort: charged,
    });
    session.accumulated += charged;
    Ok(Json(FeedbackResponse {
        session: session.view(),
        charged,
        complete: false,
    }))
}

async fn accept_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<AcceptResponse>, ApiError> {
    let session = state.lookup(&id)?;
    let mut session = session.lock().await;
    session.last_used = Instant::now();
    ensure_open(&session)?;

    let charged = state.config().costs.accept();
    let mut accepted = session.clone();
    accepted.accumulated += charged;
    accepted.state = SessionState::Accepted;
    let record = accepted.record();

    if let Some(path) = state.config().persist.clone() {
        let _guard = state.0.persist_lock.lock().await;
        let line = record.clone();
        tokio::task::spawn_blocking(move || append_session_log(&line, path))
            .await
            .map_err(ApiError::internal)?
            .map_err(ApiError::internal)?;
    }

    *session = accepted;
    let ratios = if record.reference.is_empty() {
        None
    } else {
        effort_metrics(std::slice::from_ref(&record)).ok()
    };
    tracing::debug!(%id, totals = ?session.accumulated, "session accepted");
    Ok(Json(AcceptResponse {
        session: session.view(),
        charged,
        ratios,
        record,
    }))
}
