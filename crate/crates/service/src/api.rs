use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use qdesk_core::circuit::{CircuitError, ExecSession};
use qdesk_core::grover::{data_probabilities, grover_circuit, GroverError, GroverSpec};
use qdesk_core::qdsl::{self, ParseError};
use qdesk_core::quantumcore::{probabilities, QuantumError};
use qdesk_core::state_json::StateJson;
use serde::{Deserialize, Serialize};

use crate::store::{SessionKind, SessionRecord, SessionStore};

/// Upper bound on stored snapshot amplitudes per session, i.e.
/// `(stages + 1) * 2^qubits`.
pub const MAX_HISTORY_AMPLITUDES: usize = 1 << 24;

#[derive(Debug, Serialize)]
pub struct SpanJson {
    pub line: usize,
    pub col: usize,
    pub length: usize,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<SpanJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<String>>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                kind,
                message: message.into(),
                span: None,
                expected: None,
            },
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no session {id:?}"))
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        let mut err = Self::new(StatusCode::BAD_REQUEST, "parse", e.to_string());
        err.body.span = Some(SpanJson {
            line: e.span.line,
            col: e.span.col,
            length: e.span.length,
        });
        err.body.expected = (!e.expected.is_empty()).then_some(e.expected);
        err
    }
}

impl From<CircuitError> for ApiError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::Capacity { .. } | CircuitError::Quantum(QuantumError::Capacity { .. }) => {
                Self::new(StatusCode::BAD_REQUEST, "capacity", e.to_string())
            }
            CircuitError::Navigation(_) => Self::new(StatusCode::CONFLICT, "navigation", e.to_string()),
            other => Self::new(StatusCode::BAD_REQUEST, "invalid", other.to_string()),
        }
    }
}

impl From<GroverError> for ApiError {
    fn from(e: GroverError) -> Self {
        match e {
            GroverError::Range(_) => Self::new(StatusCode::BAD_REQUEST, "range", e.to_string()),
            GroverError::Circuit(c) => c.into(),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroverBody {
    pub k: usize,
    pub target: usize,
    pub iterations: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateBody {
    pub program: Option<String>,
    pub grover: Option<GroverBody>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepBody {
    pub direction: Direction,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetargetBody {
    pub target: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestartBody {
    pub grover: Option<RetargetBody>,
}

#[derive(Debug, Serialize)]
pub struct GroverInfo {
    pub k: usize,
    pub target: usize,
    pub iterations: usize,
}

impl From<GroverSpec> for GroverInfo {
    fn from(s: GroverSpec) -> Self {
        Self {
            k: s.data_qubits,
            target: s.target,
            iterations: s.iterations,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CreateResponse {
    pub id: String,
    pub qubits: usize,
    pub stage_count: usize,
    pub stage_labels: Vec<String>,
    pub cursor: usize,
    pub state: StateJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grover: Option<GroverInfo>,
}

#[derive(Debug, Serialize)]
pub struct StepResponse {
    pub cursor: usize,
    pub state: StateJson,
}

#[derive(Debug, Serialize)]
pub struct StateResponse {
    pub cursor: usize,
    pub stage_count: usize,
    pub state: StateJson,
    pub probabilities: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_probabilities: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct RestartResponse {
    pub cursor: usize,
    pub stage_labels: Vec<String>,
    pub state: StateJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grover: Option<GroverInfo>,
}

fn current_state(session: &ExecSession) -> StateJson {
    StateJson::from_amplitudes(session.current().amplitudes())
}

fn check_history_budget(qubits: usize, stages: usize) -> ApiResult<()> {
    let per_snapshot = u32::try_from(qubits)
        .ok()
        .and_then(|q| 1usize.checked_shl(q))
        .unwrap_or(usize::MAX);
    let total = per_snapshot.saturating_mul(stages.saturating_add(1));
    if total > MAX_HISTORY_AMPLITUDES {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "capacity",
            format!(
                "capacity exceeded: {qubits} qubits over {stages} stages need {total} stored amplitudes, limit is {MAX_HISTORY_AMPLITUDES}"
            ),
        ));
    }
    Ok(())
}

fn grover_session(spec: &GroverSpec) -> ApiResult<ExecSession> {
    // sized from the search parameters so that oversized requests fail before building
    let stages = spec.iteration_end_stage(spec.iterations);
    if spec.wire_count() <= 20 {
        check_history_budget(spec.wire_count(), stages)?;
    }
    let circuit = grover_circuit(spec)?;
    Ok(ExecSession::from_zero(circuit)?)
}

fn build(body: CreateBody) -> ApiResult<(ExecSession, SessionKind)> {
    match (body.program, body.grover) {
        (Some(program), None) => {
            let circuit = qdsl::parse(&program)?;
            let session = ExecSession::from_zero(circuit)?;
            check_history_budget(session.circuit().qubit_count(), session.stage_count())?;
            Ok((session, SessionKind::Program))
        }
        (None, Some(g)) => {
            let spec = match g.iterations {
                Some(j) => GroverSpec::new(g.k, g.target, j)?,
                None => GroverSpec::with_default_iterations(g.k, g.target)?,
            };
            Ok((grover_session(&spec)?, SessionKind::Grover(spec)))
        }
        _ => Err(ApiError::bad_request(
            "body must contain exactly one of \"program\" or \"grover\"",
        )),
    }
}

/// Runs simulation work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    body.map(|Json(b)| b)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

pub async fn create(
    State(store): State<Arc<SessionStore>>,
    body: Result<Json<CreateBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<CreateResponse>)> {
    let body = json_body(body)?;
    let response = blocking(move || {
        let (session, kind) = build(body)?;
        let qubits = session.circuit().qubit_count();
        let stage_count = session.stage_count();
        let stage_labels = session.circuit().stage_labels();
        let state = current_state(&session);
        let grover = match kind {
            SessionKind::Grover(spec) => Some(spec.into()),
            SessionKind::Program => None,
        };
        let id = store.insert(SessionRecord::new(session, kind));
        Ok(CreateResponse {
            id,
            qubits,
            stage_count,
            stage_labels,
            cursor: 0,
            state,
            grover,
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(response)))
}

pub async fn step(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Result<Json<StepBody>, JsonRejection>,
) -> ApiResult<Json<StepResponse>> {
    let body = json_body(body)?;
    blocking(move || {
        store
            .with(&id, |record| {
                let session = &mut record.session;
                match body.direction {
                    Direction::Forward => session.step_forward()?,
                    Direction::Backward => session.step_backward()?,
                };
                Ok(Json(StepResponse {
                    cursor: session.cursor(),
                    state: current_state(session),
                }))
            })
            .unwrap_or_else(|| Err(ApiError::not_found(&id)))
    })
    .await
}

pub async fn state(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<Json<StateResponse>> {
    store
        .with(&id, |record| {
            let session = &record.session;
            let snapshot = session.current();
            let probabilities = probabilities(&snapshot.state).map_err(CircuitError::from)?;
            let data_probabilities = match record.kind {
                SessionKind::Grover(_) => Some(data_probabilities(snapshot.amplitudes())),
                SessionKind::Program => None,
            };
            Ok(Json(StateResponse {
                cursor: session.cursor(),
                stage_count: session.stage_count(),
                state: current_state(session),
                probabilities,
                data_probabilities,
            }))
        })
        .unwrap_or_else(|| Err(ApiError::not_found(&id)))
}

pub async fn restart(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<RestartResponse>> {
    let body: RestartBody = if body.iter().all(u8::is_ascii_whitespace) {
        RestartBody::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?
    };
    blocking(move || {
        store
            .with(&id, |record| {
                match (body.grover, record.kind) {
                    (None, _) => record.session.restart(),
                    (Some(retarget), SessionKind::Grover(spec)) => {
                        let spec = GroverSpec::new(spec.data_qubits, retarget.target, spec.iterations)?;
                        record.session = grover_session(&spec)?;
                        record.kind = SessionKind::Grover(spec);
                    }
                    (Some(_), SessionKind::Program) => {
                        return Err(ApiError::bad_request(
                            "only Grover sessions can be retargeted",
                        ))
                    }
                }
                let grover = match record.kind {
                    SessionKind::Grover(spec) => Some(spec.into()),
                    SessionKind::Program => None,
                };
                Ok(Json(RestartResponse {
                    cursor: record.session.cursor(),
                    stage_labels: record.session.circuit().stage_labels(),
                    state: current_state(&record.session),
                    grover,
                }))
            })
            .unwrap_or_else(|| Err(ApiError::not_found(&id)))
    })
    .await
}

pub async fn remove(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<StatusCode> {
    if store.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found(&id))
    }
}
