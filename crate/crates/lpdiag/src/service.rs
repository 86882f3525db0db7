//! HTTP session service.
//!
//! Sessions live in memory. Diagnoses driven by a human oracle are replayed
//! from the start with the recorded replies on every step; the first
//! question beyond them becomes the pending question. Steps on one session
//! are serialized: a step arriving while another runs gets `409`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lpdiag_core::diagnose::{check_incorrect_clause, find_uncovered_instance, DiagnoseError, Move, Step, TreeBrowser, TreeError, Verdict};
use lpdiag_core::engine::{proof_tree, Outcome};
use lpdiag_core::spec::{Oracle, OracleError, Question, ReplayOracle, Reply, Specification};
use lpdiag_core::trace::top_level_trace;
use lpdiag_core::{parse_program, parse_query, Atom, Bounds, ParseError, Program, SolveOptions, Solver};
use serde::de::DeserializeOwned;
use tokio::net::TcpListener;

use crate::commands::answer_line;
use crate::diagnosis::{self, Algorithm};
use crate::wire::*;
use crate::BUNDLED_SPEC;

#[derive(Clone, Debug)]
pub struct Config {
    /// Defaults for every session; requests may override single bounds.
    pub bounds: Bounds,
    pub idle_timeout: Duration,
    /// Print session lifecycle lines to stderr.
    pub log: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            bounds: Bounds::default(),
            idle_timeout: Duration::from_secs(3600),
            log: false,
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorView,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorView {
                code: code.into(),
                message: message.into(),
                line: None,
                column: None,
            },
        }
    }

    fn parse(what: &str, e: &ParseError) -> Self {
        let (line, column) = e.position();
        let mut err = Self::new(StatusCode::UNPROCESSABLE_ENTITY, "parse_error", format!("{what}: {e}"));
        err.body.line = Some(line);
        err.body.column = Some(column);
        err
    }

    fn illegal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "illegal_action", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[allow(clippy::large_enum_variant)]
enum Phase {
    Run(AnswersView),
    Trace(TraceView),
    Browse(Box<TreeBrowser>),
    Dialogue {
        algorithm: Algorithm,
        replies: Vec<Reply>,
        pending: Option<Question>,
        verdict: Option<Verdict>,
        stopped: Option<StopView>,
    },
}

struct Session {
    id: String,
    mode: Mode,
    oracle: OracleMode,
    query: Atom,
    program: Program,
    spec: Option<Specification>,
    bounds: Bounds,
    from_answer: bool,
    state: Phase,
    transcript: Vec<String>,
    checked: Option<bool>,
}

fn stop(reason: &str, message: impl Into<String>) -> StopView {
    StopView {
        reason: reason.into(),
        message: message.into(),
    }
}

impl Session {
    fn create(id: String, req: CreateSession, defaults: Bounds) -> Result<Session, ApiError> {
        let program = parse_program(&req.program).map_err(|e| ApiError::parse("program", &e))?;
        let query = parse_query(&req.query).map_err(|e| ApiError::parse("query", &e))?;
        if !query.is_builtin() && !program.defines(&query.key()) {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "engine_error",
                format!("unknown predicate {}", query.key()),
            ));
        }
        let spec = match (&req.spec, req.oracle) {
            (Some(text), _) => Some(Specification::parse(text).map_err(|e| {
                let mut err = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "parse_error", format!("specification: {e}"));
                if let lpdiag_core::spec::SpecError::Parse(p) = &e {
                    (err.body.line, err.body.column) = (Some(p.position().0), Some(p.position().1));
                }
                err
            })?),
            (None, OracleMode::Spec) => Some(Specification::parse(BUNDLED_SPEC).expect("bundled specification parses")),
            (None, OracleMode::Human) => None,
        };
        let o = req.bounds;
        let bounds = Bounds::new(
            o.max_depth.unwrap_or(defaults.max_depth),
            o.max_answers.unwrap_or(defaults.max_answers),
            o.max_steps.unwrap_or(defaults.max_steps),
        )
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", "bounds must be positive"))?;
        let engine = |e: lpdiag_core::EngineError| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "engine_error", e.to_string());
        let mut transcript = Vec::new();
        let state = match req.mode {
            Mode::Run => {
                let mut solver = Solver::new(&program, &query, bounds, SolveOptions::quiet());
                let mut answers = Vec::new();
                while let Some(s) = solver.next_solution().map_err(engine)? {
                    let line = answer_line(&query, &s.answer);
                    transcript.push(format!("answer: {line}"));
                    answers.push(line);
                }
                Phase::Run(AnswersView {
                    answers,
                    truncated: truncation(solver.outcome()),
                })
            }
            Mode::Trace => {
                let t = top_level_trace(&program, &query, bounds, true).map_err(engine)?;
                transcript.extend(t.to_string().lines().map(String::from));
                Phase::Trace(TraceView {
                    rows: t
                        .entries
                        .iter()
                        .map(|e| TraceRow {
                            call: e.call.to_string(),
                            answers: e.answers.iter().map(|a| a.atom.to_string()).collect(),
                        })
                        .collect(),
                    truncated: truncation(Some(t.outcome)),
                })
            }
            Mode::Tree if req.oracle == OracleMode::Human => {
                let answer = match &req.answer {
                    Some(text) => parse_query(text).map_err(|e| ApiError::parse("answer", &e))?,
                    None => {
                        let mut solver = Solver::new(&program, &query, bounds, SolveOptions::quiet());
                        match solver.next_solution().map_err(engine)? {
                            Some(s) => s.answer.atom,
                            None => {
                                return Err(ApiError::new(
                                    StatusCode::UNPROCESSABLE_ENTITY,
                                    "engine_error",
                                    format!("{query} has no answer to diagnose"),
                                ))
                            }
                        }
                    }
                };
                let tree = proof_tree(&program, &query, &answer, bounds, true).map_err(engine)?;
                let browser = TreeBrowser::new(&program, tree);
                transcript.push(format!("root: {}", browser.current().atom));
                Phase::Browse(Box::new(browser))
            }
            mode => Phase::Dialogue {
                algorithm: mode.algorithm().expect("diagnosis mode"),
                replies: Vec::new(),
                pending: None,
                verdict: None,
                stopped: None,
            },
        };
        let mut s = Session {
            id,
            mode: req.mode,
            oracle: req.oracle,
            query,
            program,
            spec,
            bounds,
            from_answer: req.from_answer,
            state,
            transcript,
            checked: None,
        };
        s.replay();
        Ok(s)
    }

    /// Reruns a dialogue with the replies recorded so far.
    fn replay(&mut self) {
        let Phase::Dialogue {
            algorithm,
            replies,
            pending,
            verdict,
            stopped,
        } = &mut self.state
        else {
            return;
        };
        let mut oracle = match (self.oracle, &self.spec) {
            (OracleMode::Spec, Some(spec)) => Oracle::from_spec(spec.clone()),
            _ => Oracle::new(ReplayOracle::new(replies.clone())),
        };
        let run = diagnosis::run(&self.program, &self.query, *algorithm, self.from_answer, &mut oracle, self.bounds);
        let lines: Vec<String> = run.steps.iter().map(Step::to_string).collect();
        debug_assert!(lines.starts_with(&self.transcript));
        self.transcript = lines;
        *pending = None;
        match run.result {
            Ok(d) => *verdict = Some(d.verdict),
            Err(DiagnoseError::Oracle(OracleError::Pending(q))) => *pending = Some(q),
            Err(DiagnoseError::Oracle(OracleError::Aborted)) => *stopped = Some(stop("aborted", "aborted by the user")),
            Err(e @ DiagnoseError::NotASymptom(_)) => *stopped = Some(stop("not_a_symptom", e.to_string())),
            Err(e @ DiagnoseError::Inconclusive(_)) => *stopped = Some(stop("inconclusive", e.to_string())),
            Err(e) => *stopped = Some(stop("failed", e.to_string())),
        }
        if let Some(v) = verdict.clone() {
            self.checked = self.check(&v);
        }
    }

    fn check(&self, v: &Verdict) -> Option<bool> {
        let spec = self.spec.as_ref()?;
        match v {
            Verdict::IncorrectClause { .. } => check_incorrect_clause(v, &mut Oracle::from_spec(spec.clone())).ok(),
            Verdict::UncoveredAtom { .. } => find_uncovered_instance(&self.program, v, spec).ok().map(|w| w.is_some()),
        }
    }

    fn step(&mut self, action: Action) -> Result<(), ApiError> {
        match &mut self.state {
            Phase::Run(_) | Phase::Trace(_) => Err(ApiError::illegal("run and trace sessions take no actions")),
            Phase::Browse(browser) => {
                let before = browser.transcript().len();
                let result = match action {
                    Action::Move { mv } => {
                        let m = Move::parse(&mv).ok_or_else(|| ApiError::illegal(format!("unknown move `{mv}`")))?;
                        browser.go(m)
                    }
                    Action::Judge { judgment } => browser.judge(judgment.into()),
                    Action::ShowError => browser.show_error().map(|_| ()),
                    Action::Answer { .. } => {
                        return Err(ApiError::new(StatusCode::BAD_REQUEST, "no_pending_question", "no question is pending"))
                    }
                    Action::Abort => return Err(ApiError::illegal("tree sessions end with show_error")),
                };
                result.map_err(|e: TreeError| ApiError::illegal(e.to_string()))?;
                let new: Vec<String> = browser.transcript()[before..].iter().map(Step::to_string).collect();
                self.transcript.extend(new);
                if let Some(v) = browser.verdict().cloned() {
                    self.checked = self.check(&v);
                }
                Ok(())
            }
            Phase::Dialogue {
                replies,
                pending,
                stopped,
                ..
            } => {
                if pending.is_none() {
                    return Err(ApiError::new(StatusCode::BAD_REQUEST, "no_pending_question", "no question is pending"));
                }
                match action {
                    Action::Answer { reply } => replies.push(reply.into()),
                    Action::Abort => {
                        *pending = None;
                        *stopped = Some(stop("aborted", "aborted by the user"));
                        self.transcript.push("aborted".into());
                        return Ok(());
                    }
                    _ => return Err(ApiError::illegal("only oracle answers are accepted while a question is pending")),
                }
                self.replay();
                Ok(())
            }
        }
    }

    fn view(&self) -> SessionView {
        let mut v = SessionView {
            id: self.id.clone(),
            mode: self.mode,
            oracle: self.oracle,
            query: self.query.to_string(),
            status: Status::Done,
            answers: None,
            trace: None,
            tree: None,
            question: None,
            verdict: None,
            stopped: None,
            steps: self.transcript.len(),
        };
        match &self.state {
            Phase::Run(a) => v.answers = Some(a.clone()),
            Phase::Trace(t) => v.trace = Some(t.clone()),
            Phase::Browse(b) => {
                v.tree = Some(TreeView::of(b));
                v.verdict = b.verdict().map(|x| VerdictView::of(x, self.checked));
                v.status = if v.verdict.is_some() { Status::Verdict } else { Status::Navigating };
            }
            Phase::Dialogue {
                pending, verdict, stopped, ..
            } => {
                v.question = pending.as_ref().map(QuestionView::of);
                v.verdict = verdict.as_ref().map(|x| VerdictView::of(x, self.checked));
                v.stopped = stopped.clone();
                v.status = if v.question.is_some() {
                    Status::AwaitingAnswer
                } else if v.verdict.is_some() {
                    Status::Verdict
                } else {
                    Status::Stopped
                };
            }
        }
        v
    }
}

fn truncation(outcome: Option<Outcome>) -> Option<String> {
    match outcome {
        Some(Outcome::Truncated(b)) => Some(b.to_string()),
        _ => None,
    }
}

struct Entry {
    session: Arc<tokio::sync::Mutex<Session>>,
    last_used: Mutex<Instant>,
}

/// Shared service state; cheap to clone.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Shared>,
}

struct Shared {
    config: Config,
    sessions: Mutex<HashMap<String, Arc<Entry>>>,
    counter: AtomicU64,
}

impl AppState {
    pub fn new(config: Config) -> Self {
        AppState {
            inner: Arc::new(Shared {
                config,
                sessions: Mutex::new(HashMap::new()),
                counter: AtomicU64::new(0),
            }),
        }
    }

    pub fn config(&self) -> &Config {
        &self.inner.config
    }

    fn log(&self, line: impl FnOnce() -> String) {
        if self.inner.config.log {
            eprintln!("{}", line());
        }
    }

    fn entry(&self, id: &str) -> Result<Arc<Entry>, ApiError> {
        let entry = self
            .inner
            .sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`")))?;
        *entry.last_used.lock().unwrap() = Instant::now();
        Ok(entry)
    }

    fn busy() -> ApiError {
        ApiError::new(StatusCode::CONFLICT, "busy", "another step on this session is still running")
    }

    pub async fn create(&self, req: CreateSession) -> Result<SessionView, ApiError> {
        self.expire();
        let n = self.inner.counter.fetch_add(1, Ordering::Relaxed) + 1;
        let id = format!("s{n}");
        let defaults = self.inner.config.bounds;
        let mode = req.mode;
        let sid = id.clone();
        let session = tokio::task::spawn_blocking(move || Session::create(sid, req, defaults))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "engine_error", e.to_string()))??;
        let view = session.view();
        let entry = Arc::new(Entry {
            session: Arc::new(tokio::sync::Mutex::new(session)),
            last_used: Mutex::new(Instant::now()),
        });
        self.inner.sessions.lock().unwrap().insert(id.clone(), entry);
        self.log(|| format!("session {id} created ({mode:?})"));
        Ok(view)
    }

    pub fn view(&self, id: &str) -> Result<SessionView, ApiError> {
        let entry = self.entry(id)?;
        let session = entry.session.try_lock().map_err(|_| Self::busy())?;
        Ok(session.view())
    }

    pub async fn step(&self, id: &str, action: Action) -> Result<SessionView, ApiError> {
        let entry = self.entry(id)?;
        let mut session = entry.session.clone().try_lock_owned().map_err(|_| Self::busy())?;
        let view = tokio::task::spawn_blocking(move || session.step(action).map(|_| session.view()))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "engine_error", e.to_string()))??;
        if view.status == Status::Verdict || view.status == Status::Stopped {
            self.log(|| format!("session {id} finished ({:?})", view.status));
        }
        Ok(view)
    }

    pub fn transcript(&self, id: &str) -> Result<TranscriptView, ApiError> {
        let entry = self.entry(id)?;
        let session = entry.session.try_lock().map_err(|_| Self::busy())?;
        Ok(TranscriptView {
            id: id.to_string(),
            lines: session.transcript.clone(),
        })
    }

    /// Drops sessions idle for longer than the configured timeout.
    pub fn expire(&self) -> usize {
        let limit = self.inner.config.idle_timeout;
        let mut sessions = self.inner.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|id, e| {
            let keep = e.last_used.lock().unwrap().elapsed() <= limit;
            if !keep && self.inner.config.log {
                eprintln!("session {id} expired");
            }
            keep
        });
        before - sessions.len()
    }

    pub fn len(&self) -> usize {
        self.inner.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn decode<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.to_string()))
}

async fn create_handler(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let view = state.create(decode(&body)?).await?;
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn view_handler(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    state.view(&id).map(Json)
}

async fn step_handler(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Json<SessionView>, ApiError> {
    let req: StepRequest = decode(&body)?;
    state.step(&id, req.into_action()).await.map(Json)
}

async fn transcript_handler(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<TranscriptView>, ApiError> {
    state.transcript(&id).map(Json)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_handler))
        .route("/sessions/:id", get(view_handler))
        .route("/sessions/:id/step", post(step_handler))
        .route("/sessions/:id/transcript", get(transcript_handler))
        .with_state(state)
}

/// Serves until the listener fails or the future is dropped; a background
/// task sweeps idle sessions.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    let sweeper = state.clone();
    let period = (sweeper.config().idle_timeout / 4).clamp(Duration::from_millis(10), Duration::from_secs(60));
    let task = tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            sweeper.expire();
        }
    });
    let result = axum::serve(listener, router(state)).await;
    task.abort();
    result
}
