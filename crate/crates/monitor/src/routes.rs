use std::sync::Arc;

use afhe_core::ingest::canonical_line;
use afhe_core::report::series_machine;
use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::monitor::{IngestRejection, Monitor};

pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

pub fn router(monitor: Arc<Monitor>) -> Router {
    Router::new()
        .route("/v1/events", post(post_events))
        .route("/v1/alpha", get(get_alpha))
        .route("/v1/gate", get(get_gate))
        .route("/v1/healthz", get(healthz))
        .with_state(monitor)
}

/// Binds `monitor.config().listen` and serves until the process exits.
pub async fn serve(monitor: Arc<Monitor>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(monitor.config().listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "monitor listening");
    axum::serve(listener, router(monitor)).await
}

fn machine<T: Serialize + ?Sized>(status: StatusCode, body: &T) -> Response {
    text(status, canonical_line(body))
}

/// Bodies are newline-terminated, like the CLI's machine output.
fn text(status: StatusCode, mut body: String) -> Response {
    body.push('\n');
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn post_events(
    State(monitor): State<Arc<Monitor>>,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    let body = match String::from_utf8(body.to_vec()) {
        Ok(b) => b,
        Err(e) => {
            return machine(
                StatusCode::BAD_REQUEST,
                &json!({"error": "syntax_error", "message": format!("body is not UTF-8: {e}")}),
            )
        }
    };
    let key = match headers.get(IDEMPOTENCY_HEADER).map(|v| v.to_str()) {
        None => None,
        Some(Ok(k)) => Some(k.to_string()),
        Some(Err(_)) => {
            return machine(
                StatusCode::BAD_REQUEST,
                &json!({"error": "invalid_header", "message": "idempotency key must be visible ASCII"}),
            )
        }
    };
    // Appends fsync; keep them off the async workers.
    let result = tokio::task::spawn_blocking(move || monitor.ingest(&body, key.as_deref())).await;
    match result {
        Ok(Ok(outcome)) => machine(StatusCode::OK, &outcome),
        Ok(Err(IngestRejection::Body { rejected })) => machine(
            StatusCode::BAD_REQUEST,
            &json!({"error": "syntax_error", "message": "no parseable records in body", "rejected": rejected}),
        ),
        Ok(Err(IngestRejection::Storage(e))) => {
            tracing::error!(error = %e, "append failed");
            machine(
                StatusCode::INTERNAL_SERVER_ERROR,
                &json!({"error": e.code(), "message": e.to_string()}),
            )
        }
        Err(e) => machine(
            StatusCode::INTERNAL_SERVER_ERROR,
            &json!({"error": "internal", "message": e.to_string()}),
        ),
    }
}

#[derive(Debug, Deserialize)]
struct AlphaQuery {
    windows: Option<usize>,
}

async fn get_alpha(State(monitor): State<Arc<Monitor>>, Query(q): Query<AlphaQuery>) -> Response {
    text(
        StatusCode::OK,
        series_machine(&monitor.alpha_series(q.windows)),
    )
}

async fn get_gate(State(monitor): State<Arc<Monitor>>) -> Response {
    machine(StatusCode::OK, &monitor.gate_snapshot())
}

async fn healthz() -> Response {
    machine(StatusCode::OK, &json!({"status": "ok"}))
}
