//! HTTP routes over [`TrialService`].

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ServiceError;
use crate::session::{Questionnaire, SessionStatus, SummaryRow, TrialService, TurnDebug};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownPolicy(_)
            | ServiceError::UnknownSession(_)
            | ServiceError::NoData => StatusCode::NOT_FOUND,
            ServiceError::WrongStatus(_) | ServiceError::AlreadySubmitted => StatusCode::CONFLICT,
            ServiceError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Config(_) | ServiceError::Log(_) | ServiceError::Core(_) => {
                log::error!("{self}");
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub policy: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: String,
    pub greeting: String,
}

#[derive(Debug, Deserialize)]
pub struct TurnRequest {
    pub text: String,
    #[serde(default)]
    pub debug: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TurnResponse {
    pub system_text: String,
    pub status: SessionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debug: Option<TurnDebug>,
}

type Shared = Arc<TrialService>;
type ApiResult<T> = Result<Json<T>, ServiceError>;

/// Malformed bodies get the same JSON error shape as every other failure.
fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::Validation(e.body_text()))
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/api/policies", get(policies))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/turn", post(turn))
        .route("/api/session/{id}/questionnaire", post(questionnaire))
        .route("/api/summary", get(summary))
        .with_state(service)
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn policies(State(svc): State<Shared>) -> Json<Vec<String>> {
    Json(svc.policy_ids())
}

async fn create_session(
    State(svc): State<Shared>,
    req: Result<Json<CreateRequest>, JsonRejection>,
) -> ApiResult<CreateResponse> {
    let req = body(req)?;
    let (session_id, greeting) = svc.create_session(&req.policy)?;
    Ok(Json(CreateResponse {
        session_id,
        greeting,
    }))
}

async fn turn(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    req: Result<Json<TurnRequest>, JsonRejection>,
) -> ApiResult<TurnResponse> {
    let req = body(req)?;
    let reply = svc.user_turn(&id, &req.text)?;
    Ok(Json(TurnResponse {
        system_text: reply.system_text,
        status: reply.status,
        debug: req.debug.then_some(reply.debug),
    }))
}

async fn questionnaire(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    q: Result<Json<Questionnaire>, JsonRejection>,
) -> ApiResult<serde_json::Value> {
    svc.submit_questionnaire(&id, body(q)?)?;
    Ok(Json(json!({ "status": SessionStatus::Closed })))
}

async fn summary(State(svc): State<Shared>) -> ApiResult<Vec<SummaryRow>> {
    Ok(Json(svc.summary()?))
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(service: TrialService, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(service))).await
}
