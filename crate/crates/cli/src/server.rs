//! HTTP/JSON session service.
//!
//! Sessions live in memory behind one mutex each, so requests against a
//! session are serialized while other sessions proceed. Engine work runs on
//! the blocking pool. Pools are built once per (model, pool size) and
//! shared.

use std::collections::HashMap;
use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use anyhow::{Context, Result};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use isneak::preprocess::EncodedPool;
use isneak::ranking::Choice;
use serde_json::{json, Map, Value};
use tower_http::services::ServeDir;

use crate::models::{discover, ModelEntry};
use crate::session::{Rating, Session, SessionError, Snapshot};

/// Seed used to enumerate shared pools; session seeds drive the search.
pub const POOL_SEED: u64 = 1;
pub const DEFAULT_POOL_SIZE: usize = 10_000;
const MAX_POOL_SIZE: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub models_dir: PathBuf,
    pub ttl: Duration,
    pub snapshot_dir: Option<PathBuf>,
    pub ui_dir: PathBuf,
}

type PoolSlot = Arc<Mutex<Option<Arc<EncodedPool>>>>;

pub struct AppState {
    config: ServerConfig,
    models: Vec<ModelEntry>,
    pools: Mutex<HashMap<(String, usize), PoolSlot>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Result<Arc<Self>> {
        let models = discover(&config.models_dir)?;
        let state = Arc::new(Self {
            config,
            models,
            pools: Mutex::new(HashMap::new()),
            sessions: RwLock::new(HashMap::new()),
        });
        state.restore_snapshots()?;
        Ok(state)
    }

    pub fn models(&self) -> &[ModelEntry] {
        &self.models
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session map").len()
    }

    fn pool(&self, model: &ModelEntry, size: usize) -> Result<Arc<EncodedPool>> {
        let slot = self
            .pools
            .lock()
            .expect("pool cache")
            .entry((model.id.clone(), size))
            .or_default()
            .clone();
        let mut slot = slot.lock().expect("pool slot");
        if let Some(p) = slot.as_ref() {
            return Ok(p.clone());
        }
        let pool = Arc::new(model.load_pool(size, POOL_SEED)?);
        *slot = Some(pool.clone());
        Ok(pool)
    }

    fn session(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.read().expect("session map").get(id).cloned()
    }

    /// Drops sessions idle for longer than the TTL. Busy sessions are left
    /// for the next sweep.
    pub fn expire(&self) -> usize {
        let mut map = self.sessions.write().expect("session map");
        let before = map.len();
        map.retain(|_, s| match s.try_lock() {
            Ok(s) => s.last_active.elapsed() <= self.config.ttl,
            Err(_) => true,
        });
        before - map.len()
    }

    fn snapshot(&self, s: &Session) {
        let Some(dir) = &self.config.snapshot_dir else { return };
        let path = dir.join(format!("{}.json", s.id));
        let text = serde_json::to_string_pretty(&s.snapshot()).expect("snapshots serialize");
        // snapshots are best effort; the live session is authoritative
        let _ = fs::write(path, text);
    }

    fn restore_snapshots(&self) -> Result<()> {
        let Some(dir) = &self.config.snapshot_dir else { return Ok(()) };
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for entry in fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Ok(snap) = fs::read_to_string(&path)
                .map_err(anyhow::Error::from)
                .and_then(|t| serde_json::from_str::<Snapshot>(&t).map_err(anyhow::Error::from))
            else {
                continue;
            };
            let Some(model) = self.models.iter().find(|m| m.id == snap.model_id) else { continue };
            let pool = self.pool(model, snap.pool_size)?;
            let session = Session::restore(&snap, pool);
            self.sessions
                .write()
                .expect("session map")
                .insert(snap.session_id.clone(), Arc::new(Mutex::new(session)));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    field: Option<&'static str>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            field: None,
        }
    }

    fn field(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
            field: Some(field),
        }
    }

    fn no_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown session `{id}`"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if let Some(f) = self.field {
            body["field"] = json!(f);
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::NotAwaiting(s) => Self::new(
                StatusCode::CONFLICT,
                format!("session is not awaiting an answer (state {})", state_name(s)),
            ),
            SessionError::StaleQuestion { pending, given } => Self::new(
                StatusCode::CONFLICT,
                format!("question {given} was already answered; pending question is {pending}"),
            ),
            SessionError::NotDone(s) => {
                Self::new(StatusCode::NOT_FOUND, format!("result not available (state {})", state_name(s)))
            }
        }
    }
}

fn state_name(s: crate::session::SessionState) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

type ApiResult<T> = std::result::Result<T, ApiError>;

fn object(body: &Bytes) -> ApiResult<Map<String, Value>> {
    match serde_json::from_slice::<Value>(body) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(ApiError::new(StatusCode::BAD_REQUEST, "body must be a JSON object")),
        Err(e) => Err(ApiError::new(StatusCode::BAD_REQUEST, format!("malformed JSON: {e}"))),
    }
}

fn optional_u64(m: &Map<String, Value>, field: &'static str) -> ApiResult<Option<u64>> {
    match m.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| ApiError::field(field, format!("`{field}` must be a non-negative integer"))),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

async fn list_models(State(app): State<Arc<AppState>>) -> Json<Value> {
    Json(json!({ "models": app.models }))
}

async fn create_session(State(app): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    app.expire();
    let m = object(&body)?;
    let model_id = match m.get("model_id") {
        Some(Value::String(s)) => s.clone(),
        _ => return Err(ApiError::field("model_id", "`model_id` must be a string")),
    };
    let model = app
        .models
        .iter()
        .find(|e| e.id == model_id)
        .cloned()
        .ok_or_else(|| ApiError::field("model_id", format!("unknown model `{model_id}`")))?;
    let seed = optional_u64(&m, "seed")?.unwrap_or(0);
    let pool_size = optional_u64(&m, "pool_size")?.map_or(DEFAULT_POOL_SIZE, |v| v as usize);
    if !(16..=MAX_POOL_SIZE).contains(&pool_size) {
        return Err(ApiError::field("pool_size", format!("`pool_size` must be in 16..={MAX_POOL_SIZE}")));
    }

    let id = uuid::Uuid::new_v4().simple().to_string();
    let app2 = app.clone();
    let sid = id.clone();
    let session = blocking(move || -> Result<Session> {
        let pool = app2.pool(&model, pool_size)?;
        Ok(Session::start(sid, model.id.clone(), seed, pool_size, pool))
    })
    .await?
    .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("{e:#}")))?;
    app.snapshot(&session);
    app.sessions
        .write()
        .expect("session map")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id }))).into_response())
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    app.expire();
    let s = app.session(&id).ok_or_else(|| ApiError::no_session(&id))?;
    let view = blocking(move || s.lock().expect("session").status()).await?;
    Ok(Json(serde_json::to_value(view).expect("status serializes")))
}

async fn answer(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    app.expire();
    let s = app.session(&id).ok_or_else(|| ApiError::no_session(&id))?;
    let m = object(&body)?;
    let choice = match m.get("choice").and_then(Value::as_str) {
        Some("A") => Choice::A,
        Some("B") => Choice::B,
        _ => return Err(ApiError::field("choice", "`choice` must be \"A\" or \"B\"")),
    };
    let question_id = optional_u64(&m, "question_id")?;
    let app2 = app.clone();
    let view = blocking(move || {
        let mut s = s.lock().expect("session");
        match question_id {
            Some(q) => s.answer_question(q as usize, choice)?,
            None => s.answer(choice)?,
        }
        app2.snapshot(&s);
        Ok::<_, SessionError>(s.status())
    })
    .await??;
    Ok(Json(serde_json::to_value(view).expect("status serializes")))
}

async fn result(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    app.expire();
    let s = app.session(&id).ok_or_else(|| ApiError::no_session(&id))?;
    let s = s.lock().expect("session");
    let r = s.result()?;
    Ok(([(axum::http::header::CONTENT_TYPE, "application/json")], r.to_json()).into_response())
}

async fn rating(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    app.expire();
    let s = app.session(&id).ok_or_else(|| ApiError::no_session(&id))?;
    let m = object(&body)?;
    let score = match optional_u64(&m, "score")? {
        Some(v) if v <= 5 => v as u8,
        _ => return Err(ApiError::field("score", "`score` must be an integer in 0..=5")),
    };
    let solution = optional_u64(&m, "solution")?.map(|v| v as usize);
    let mut s = s.lock().expect("session");
    s.rate(Rating { score, solution });
    app.snapshot(&s);
    Ok(Json(json!({ "ratings": s.ratings().len() })))
}

pub fn router(app: Arc<AppState>) -> Router {
    let ui = ServeDir::new(app.config.ui_dir.clone());
    Router::new()
        .route("/api/v1/models", get(list_models))
        .route("/api/v1/sessions", post(create_session))
        .route("/api/v1/sessions/{id}", get(get_session))
        .route("/api/v1/sessions/{id}/answer", post(answer))
        .route("/api/v1/sessions/{id}/result", get(result))
        .route("/api/v1/sessions/{id}/rating", post(rating))
        .nest_service("/ui", ui)
        .with_state(app)
}

/// Serves until the process is stopped, sweeping idle sessions in the
/// background.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> Result<()> {
    let ttl = config.ttl;
    let app = AppState::new(config)?;
    let sweeper = app.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(ttl.max(Duration::from_secs(2)) / 2);
        loop {
            tick.tick().await;
            sweeper.expire();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("cannot bind {addr}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(app)).await?;
    Ok(())
}
