//! HTTP transport.
//!
//! | method | path                              | body               |
//! |--------|-----------------------------------|--------------------|
//! | POST   | `/sessions`                       | `CreateSession`    |
//! | POST   | `/sessions/import`                | `ImportSession`    |
//! | DELETE | `/sessions/{id}`                  |                    |
//! | POST   | `/sessions/{id}/utterances`       | `PostUtterance`    |
//! | GET    | `/sessions/{id}/state`            |                    |
//! | GET    | `/sessions/{id}/lexicon`          |                    |
//! | GET    | `/sessions/{id}/lexicon/export`   |                    |
//! | GET    | `/sessions/{id}/history`          |                    |

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;

use crate::service::{ServiceError, SessionService};
use crate::wire::{CreateSession, ErrorBody, ImportSession, PostUtterance};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::InvalidConfig(_)
            | ServiceError::InvalidRequest(_)
            | ServiceError::InvalidDocument(_) => StatusCode::BAD_REQUEST,
            ServiceError::Busy(_) => StatusCode::CONFLICT,
            ServiceError::Engine(_) => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let body = ErrorBody {
            error: self.code().to_string(),
            message: self.to_string(),
            retry: matches!(self, ServiceError::Busy(_)),
        };
        (status, Json(body)).into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::InvalidRequest(e.body_text()))
}

type Shared = State<Arc<SessionService>>;

async fn create(State(svc): Shared, payload: Result<Json<CreateSession>, JsonRejection>) -> Result<Response, ServiceError> {
    let created = svc.create(body(payload)?)?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn import(State(svc): Shared, payload: Result<Json<ImportSession>, JsonRejection>) -> Result<Response, ServiceError> {
    let created = svc.import(body(payload)?)?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn remove(State(svc): Shared, Path(id): Path<String>) -> Result<StatusCode, ServiceError> {
    svc.delete(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn utter(
    State(svc): Shared,
    Path(id): Path<String>,
    payload: Result<Json<PostUtterance>, JsonRejection>,
) -> Result<Response, ServiceError> {
    Ok(Json(svc.post_utterance(&id, body(payload)?)?).into_response())
}

async fn state(State(svc): Shared, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(svc.state(&id)?).into_response())
}

async fn lexicon(State(svc): Shared, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(svc.lexicon(&id)?).into_response())
}

async fn export(State(svc): Shared, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let text = svc.export_lexicon(&id)?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/json".to_string()),
            (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{id}.lex\"")),
        ],
        text,
    )
        .into_response())
}

async fn history(State(svc): Shared, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(svc.history(&id)?).into_response())
}

pub fn router(service: Arc<SessionService>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/import", post(import))
        .route("/sessions/{id}", delete(remove))
        .route("/sessions/{id}/utterances", post(utter))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/lexicon", get(lexicon))
        .route("/sessions/{id}/lexicon/export", get(export))
        .route("/sessions/{id}/history", get(history))
        .with_state(service)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, service: Arc<SessionService>) -> std::io::Result<()> {
    axum::serve(listener, router(service)).await
}
