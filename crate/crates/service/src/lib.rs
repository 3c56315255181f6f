//! HTTP/JSON service for stepping circuits remotely.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | `{"program": "..."}` or `{"grover": {"k", "target", "iterations"?}}` |
//! | POST | `/sessions/{id}/step` | `{"direction": "forward" \| "backward"}` |
//! | GET | `/sessions/{id}/state` | |
//! | POST | `/sessions/{id}/restart` | optional `{"grover": {"target"}}` |
//! | DELETE | `/sessions/{id}` | |
//!
//! States use the `{"qubits": n, "amplitudes": [[re, im], ...]}` schema.
//! Errors are `{"kind", "message", "span"?, "expected"?}` with status 400
//! (bad input, parse, range, capacity), 404 (unknown session) or 409
//! (stepping past either end).

pub mod api;
pub mod store;

use std::sync::Arc;
use std::time::Duration;

use axum::http::{header, HeaderValue, Method};
use axum::routing::{delete, get, post};
use axum::Router;
use thiserror::Error;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;

pub use store::{SessionStore, DEFAULT_TTL};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    pub ttl: Duration,
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 8077,
            ttl: DEFAULT_TTL,
            cors_origin: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid CORS origin {0:?}")]
    CorsOrigin(String),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn router(store: Arc<SessionStore>, cors_origin: Option<&str>) -> Result<Router, ServiceError> {
    let app = Router::new()
        .route("/sessions", post(api::create))
        .route("/sessions/{id}", delete(api::remove))
        .route("/sessions/{id}/step", post(api::step))
        .route("/sessions/{id}/state", get(api::state))
        .route("/sessions/{id}/restart", post(api::restart))
        .with_state(store);
    let Some(origin) = cors_origin else {
        return Ok(app);
    };
    let origin = HeaderValue::from_str(origin)
        .map_err(|_| ServiceError::CorsOrigin(origin.to_string()))?;
    Ok(app.layer(
        CorsLayer::new()
            .allow_origin(origin)
            .allow_methods([Method::GET, Method::POST, Method::DELETE])
            .allow_headers([header::CONTENT_TYPE]),
    ))
}

/// Serves on an already bound listener until the process ends. Expired
/// sessions are swept periodically.
pub async fn serve_on(listener: TcpListener, config: &ServiceConfig) -> Result<(), ServiceError> {
    let store = Arc::new(SessionStore::new(config.ttl));
    let app = router(store.clone(), config.cors_origin.as_deref())?;
    let period = config.ttl.clamp(Duration::from_millis(10), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            store.evict_expired();
        }
    });
    axum::serve(listener, app).await?;
    Ok(())
}

pub async fn serve(config: &ServiceConfig) -> Result<(), ServiceError> {
    let addr = format!("{}:{}", config.host, config.port);
    let listener = TcpListener::bind(&addr)
        .await
        .map_err(|source| ServiceError::Bind { addr, source })?;
    serve_on(listener, config).await
}
