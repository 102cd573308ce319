use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

use convokernel::engine::{DebugTrace, Engine, TurnEvent, TurnResponse};
use convokernel::error::EngineError;

/// Body of `POST /v1/conversations/{id}/turns`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurnRequest {
    pub user_id: String,
    pub utterance: String,
    pub asr_confidence: f64,
    #[serde(default)]
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatingRequest {
    pub rating: i64,
    #[serde(default)]
    pub timestamp: Option<u64>,
}

#[derive(Debug)]
pub enum ApiError {
    Engine(EngineError),
    Internal(String),
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        Self::Engine(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = match self {
            Self::Engine(e) => {
                let (status, kind) = match &e {
                    EngineError::Protocol(_) => (StatusCode::BAD_REQUEST, "protocol"),
                    EngineError::BadRating(_) => (StatusCode::BAD_REQUEST, "bad_rating"),
                    EngineError::UnknownConversation(_) => (StatusCode::NOT_FOUND, "unknown_conversation"),
                    EngineError::AlreadyRated(_) => (StatusCode::CONFLICT, "already_rated"),
                    EngineError::Content(_) => (StatusCode::INTERNAL_SERVER_ERROR, "content"),
                    EngineError::Store(_) => (StatusCode::SERVICE_UNAVAILABLE, "store"),
                };
                (status, kind, e.to_string())
            }
            Self::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m),
        };
        (status, Json(json!({"error": kind, "message": message}))).into_response()
    }
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, EngineError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?.map_err(ApiError::from)
}

async fn post_turn(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    Json(body): Json<TurnRequest>,
) -> Result<Json<TurnResponse>, ApiError> {
    let event = TurnEvent {
        conversation_id: id,
        user_id: body.user_id,
        utterance: body.utterance,
        asr_confidence: body.asr_confidence,
        timestamp: body.timestamp.unwrap_or_else(now_ms),
    };
    let response = blocking(move || engine.handle_turn(&event)).await?;
    Ok(Json(response))
}

async fn post_rating(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    Json(body): Json<RatingRequest>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let conv = id.clone();
    let timestamp = body.timestamp.unwrap_or_else(now_ms);
    blocking(move || engine.rate_at(&conv, body.rating, timestamp)).await?;
    Ok(Json(json!({"conversation_id": id, "rating": body.rating})))
}

async fn get_trace(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
) -> Result<Json<Vec<DebugTrace>>, ApiError> {
    Ok(Json(blocking(move || engine.trace(&id)).await?))
}

async fn post_reload(State(engine): State<Arc<Engine>>) -> Result<Json<serde_json::Value>, ApiError> {
    blocking(move || engine.reload()).await?;
    Ok(Json(json!({"status": "reloaded"})))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/conversations/{id}/turns", post(post_turn))
        .route("/v1/conversations/{id}/rating", post(post_rating))
        .route("/v1/conversations/{id}/trace", get(get_trace))
        .route("/v1/admin/reload", post(post_reload))
        .layer(CorsLayer::permissive())
        .with_state(engine)
}

#[cfg(unix)]
fn reload_on_sighup(engine: Arc<Engine>) -> anyhow::Result<()> {
    use tokio::signal::unix::{signal, SignalKind};
    let mut hup = signal(SignalKind::hangup())?;
    tokio::spawn(async move {
        while hup.recv().await.is_some() {
            let e = engine.clone();
            match tokio::task::spawn_blocking(move || e.reload()).await {
                Ok(Ok(())) => tracing::info!("content reloaded on SIGHUP"),
                Ok(Err(err)) => tracing::error!(error = %err, "reload failed, keeping current content"),
                Err(err) => tracing::error!(error = %err, "reload task panicked"),
            }
        }
    });
    Ok(())
}

#[cfg(not(unix))]
fn reload_on_sighup(_: Arc<Engine>) -> anyhow::Result<()> {
    Ok(())
}

pub async fn serve(engine: Arc<Engine>, addr: SocketAddr) -> anyhow::Result<()> {
    reload_on_sighup(engine.clone())?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
