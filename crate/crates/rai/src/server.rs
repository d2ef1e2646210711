//! The `/v1` JSON service. Handlers only translate between HTTP and
//! [`Engine`] calls; bodies are the canonical serialization of library
//! values.

use std::collections::{BTreeSet, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use rai_core::assessment::{Clock, SessionOptions, SessionStore};
use rai_core::canonical::to_canonical_string;
use rai_core::compliance::coverage_check;
use rai_core::model::{summarize, LifecycleStage, PrincipleId, QuestionLevel};
use rai_core::navigator::{filter, FilterCriteria};
use rai_core::reporting::{render_assessment_report, ReportFormat};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;

use crate::app::{AnswerInput, AppError, Engine, RiskInput};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bank_path: Option<PathBuf>,
    pub requirements_paths: Vec<PathBuf>,
    pub store_dir: PathBuf,
    pub bind: SocketAddr,
    pub read_only: bool,
}

impl ServiceConfig {
    /// Checks that every configured path exists.
    pub fn check(&self) -> Result<(), AppError> {
        let paths = self.bank_path.iter().chain(&self.requirements_paths).chain([&self.store_dir]);
        for p in paths {
            if !p.exists() {
                return Err(AppError::new("IO", format!("{} does not exist", p.display()))
                    .with_details(json!({ "path": p })));
            }
        }
        Ok(())
    }
}

pub struct AppState {
    pub engine: Engine,
    pub store: SessionStore,
    pub clock: Arc<dyn Clock>,
    pub read_only: bool,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(engine: Engine, store: SessionStore, clock: Arc<dyn Clock>, read_only: bool) -> Self {
        Self {
            engine,
            store,
            clock,
            read_only,
            locks: Mutex::new(HashMap::new()),
        }
    }

    /// Serializes writers of one session inside this process, so concurrent
    /// posts queue instead of tripping the store's contention check.
    fn session_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }

    fn writable(&self) -> Result<(), ApiError> {
        if self.read_only {
            Err(ApiError(AppError::new("READ_ONLY", "the service is read-only")))
        } else {
            Ok(())
        }
    }
}

type Shared = Arc<AppState>;

pub struct ApiError(pub AppError);

impl<E: Into<AppError>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

pub fn status_for(code: &str) -> StatusCode {
    match code {
        "NOT_FOUND" | "UNKNOWN_PROFILE" | "UNKNOWN_SET" => StatusCode::NOT_FOUND,
        "CONTENTION" | "ALREADY_EXISTS" => StatusCode::CONFLICT,
        "READ_ONLY" => StatusCode::FORBIDDEN,
        "STORE_IO" | "STORE_CORRUPT" | "IO" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_for(&self.0.code);
        json_response(status, &self.0)
    }
}

fn json_response<T: Serialize + ?Sized>(status: StatusCode, value: &T) -> Response {
    let body = to_canonical_string(value).expect("responses always serialize");
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn ok<T: Serialize + ?Sized>(value: &T) -> Result<Response, ApiError> {
    Ok(json_response(StatusCode::OK, value))
}

/// JSON body extraction with errors in the service's own shape.
struct JsonBody<T>(T);

impl<S: Send + Sync, T: serde::de::DeserializeOwned> axum::extract::FromRequest<S> for JsonBody<T> {
    type Rejection = ApiError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = axum::body::Bytes::from_request(req, state)
            .await
            .map_err(|e| AppError::new("BAD_REQUEST", e.to_string()))?;
        serde_json::from_slice(&bytes)
            .map(JsonBody)
            .map_err(|e| ApiError(AppError::new("BAD_REQUEST", format!("invalid body: {e}"))))
    }
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/v1/bank/summary", get(bank_summary))
        .route("/v1/questions", get(questions))
        .route("/v1/profiles", get(profiles))
        .route("/v1/profiles/{id}", get(profile))
        .route("/v1/requirements", get(requirement_sets))
        .route("/v1/requirements/{set}/coverage", get(coverage))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(show_session))
        .route("/v1/sessions/{id}/answers", post(answer))
        .route("/v1/sessions/{id}/next", get(next))
        .route("/v1/sessions/{id}/risks", post(add_risk))
        .route("/v1/sessions/{id}/score", get(score))
        .route("/v1/sessions/{id}/report", get(report))
        .fallback(|| async { ApiError(AppError::new("NOT_FOUND", "no such endpoint")) })
        .with_state(state)
}

async fn bank_summary(State(st): State<Shared>) -> Result<Response, ApiError> {
    ok(&summarize(&st.engine.bank)?)
}

#[derive(Debug, Default, Deserialize)]
struct QuestionQuery {
    principle: Option<String>,
    level: Option<String>,
    stage: Option<String>,
    source: Option<String>,
    category: Option<String>,
    q: Option<String>,
}

fn bad(e: impl std::fmt::Display) -> AppError {
    AppError::new("BAD_REQUEST", e.to_string())
}

/// Comma-separated values for one filter dimension.
fn parse_list<T: Ord>(raw: &Option<String>, parse: impl Fn(&str) -> Result<T, AppError>) -> Result<BTreeSet<T>, AppError> {
    raw.iter()
        .flat_map(|s| s.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect()
}

pub fn criteria_from(
    principle: &Option<String>,
    level: &Option<String>,
    stage: &Option<String>,
    source: &Option<String>,
    category: &Option<String>,
    text: &Option<String>,
) -> Result<FilterCriteria, AppError> {
    Ok(FilterCriteria {
        principles: parse_list(principle, |s| s.parse::<PrincipleId>().map_err(bad))?,
        levels: parse_list(level, |s| {
            let n: i64 = s.trim_start_matches(['L', 'l']).parse().map_err(bad)?;
            QuestionLevel::new(n).map_err(bad)
        })?,
        stages: parse_list(stage, |s| s.parse::<LifecycleStage>().map_err(bad))?,
        category_ids: parse_list(category, |s| Ok(s.to_string()))?,
        sources: parse_list(source, |s| Ok(s.to_string()))?,
        text: text.clone().filter(|t| !t.is_empty()),
    })
}

async fn questions(State(st): State<Shared>, Query(q): Query<QuestionQuery>) -> Result<Response, ApiError> {
    let criteria = criteria_from(&q.principle, &q.level, &q.stage, &q.source, &q.category, &q.q)?;
    ok(&filter(&st.engine.bank, &criteria))
}

async fn profiles(State(st): State<Shared>) -> Result<Response, ApiError> {
    ok(&st.engine.bank.profiles)
}

async fn profile(State(st): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let p = st
        .engine
        .bank
        .profile(&id)
        .ok_or_else(|| AppError::from(rai_core::navigator::NavigatorError::UnknownProfile(id.clone())))?;
    ok(p)
}

async fn requirement_sets(State(st): State<Shared>) -> Result<Response, ApiError> {
    ok(&st.engine.sets.values().collect::<Vec<_>>())
}

async fn coverage(State(st): State<Shared>, Path(set): Path<String>) -> Result<Response, ApiError> {
    let set = st.engine.set(&set)?;
    ok(&coverage_check(&set.requirements, &set.mapping, &st.engine.bank))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    profile: String,
    #[serde(default)]
    subject: String,
    #[serde(default)]
    options: SessionOptions,
    #[serde(default)]
    session_id: Option<String>,
}

async fn create_session(State(st): State<Shared>, JsonBody(body): JsonBody<CreateSession>) -> Result<Response, ApiError> {
    st.writable()?;
    let session = st.engine.create_session(
        &st.store,
        &body.profile,
        &body.subject,
        body.options,
        body.session_id,
        st.clock.now(),
    )?;
    Ok(json_response(StatusCode::CREATED, &st.engine.view(session)?))
}

async fn show_session(State(st): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let loaded = st.store.load_checked(&id, &st.engine.bank.version)?;
    let mut response = json_response(StatusCode::OK, &st.engine.view(loaded.session)?);
    if let Some(w) = loaded.warning {
        let text = format!(
            "199 rai \"session bank version {} differs from active bank {}\"",
            w.session_version, w.bank_version
        );
        if let Ok(v) = HeaderValue::from_str(&text) {
            response.headers_mut().insert(header::WARNING, v);
        }
    }
    Ok(response)
}

async fn answer(
    State(st): State<Shared>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<AnswerInput>,
) -> Result<Response, ApiError> {
    st.writable()?;
    let lock = st.session_lock(&id);
    let _guard = lock.lock().await;
    let session = st.engine.answer(&st.store, &id, body, "api", st.clock.now())?;
    ok(&st.engine.view(session)?)
}

#[derive(Debug, Deserialize)]
struct NextQuery {
    k: Option<usize>,
}

async fn next(State(st): State<Shared>, Path(id): Path<String>, Query(q): Query<NextQuery>) -> Result<Response, ApiError> {
    let session = st.store.load(&id)?;
    let ids = session
        .next_question_ids(&st.engine.bank, q.k.unwrap_or(1))
        .map_err(AppError::from)?;
    let questions: Vec<_> = ids
        .iter()
        .map(|q| st.engine.bank.find_question(q))
        .collect::<Result<_, _>>()?;
    ok(&questions)
}

async fn add_risk(
    State(st): State<Shared>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<RiskInput>,
) -> Result<Response, ApiError> {
    st.writable()?;
    let lock = st.session_lock(&id);
    let _guard = lock.lock().await;
    let session = st.engine.add_risk(&st.store, &id, body, st.clock.now())?;
    Ok(json_response(StatusCode::CREATED, &st.engine.view(session)?))
}

#[derive(Debug, Deserialize)]
struct ScoreQuery {
    set: Option<String>,
    threshold: Option<u32>,
}

async fn score(State(st): State<Shared>, Path(id): Path<String>, Query(q): Query<ScoreQuery>) -> Result<Response, ApiError> {
    let session = st.store.load(&id)?;
    ok(&st.engine.score_session(&session, q.set.as_deref(), q.threshold)?)
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    format: Option<String>,
    set: Option<String>,
}

#[derive(Serialize)]
struct ReportBody<'a> {
    format: &'a str,
    content: String,
}

async fn report(State(st): State<Shared>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> Result<Response, ApiError> {
    let session = st.store.load(&id)?;
    let format: ReportFormat = q.format.as_deref().unwrap_or("md").parse().map_err(AppError::from)?;
    let set = match q.set.as_deref() {
        Some(s) => Some(st.engine.set(s)?),
        None => st.engine.sets.get(&session.profile_id),
    };
    let text = render_assessment_report(&session, &st.engine.bank, set, format)?;
    match format {
        ReportFormat::Json => Ok(json_response(StatusCode::OK, &serde_json::from_str::<serde_json::Value>(&text).expect("report is json"))),
        _ => ok(&ReportBody {
            format: "markdown",
            content: text,
        }),
    }
}

/// Binds `config.bind` and serves until the process is interrupted.
pub async fn serve(config: ServiceConfig, clock: Arc<dyn Clock>, ready: impl FnOnce(SocketAddr)) -> Result<(), AppError> {
    config.check()?;
    let engine = Engine::load(config.bank_path.as_deref(), &config.requirements_paths)?;
    let store = SessionStore::open(&config.store_dir)?;
    let listener = TcpListener::bind(config.bind)
        .await
        .map_err(|e| AppError::new("BIND", format!("cannot bind {}: {e}", config.bind)))?;
    let addr = listener.local_addr().map_err(|e| AppError::new("BIND", e.to_string()))?;
    ready(addr);
    let state = Arc::new(AppState::new(engine, store, clock, config.read_only));
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| AppError::new("IO", e.to_string()))
}
