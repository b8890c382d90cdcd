use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use wmt_core::coupler::{load_composition, validate_composition, Catalog, Finding};
use wmt_core::registry::{format_citation, ComponentMeta};

use crate::executor::Executor;
use crate::store::{Store, StoreError};

pub const USER_HEADER: &str = "x-user";
const ANONYMOUS: &str = "anonymous";

pub struct AppState {
    pub store: Arc<Store>,
    pub catalog: Arc<Catalog>,
    pub executor: Executor,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl std::fmt::Display) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.to_string() }),
        }
    }

    fn with_findings(status: StatusCode, message: &str, findings: &[Finding]) -> Self {
        ApiError {
            status,
            body: json!({
                "error": message,
                "findings": findings,
                "messages": findings.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            }),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, e),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn user(headers: &HeaderMap) -> String {
    headers
        .get(USER_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .unwrap_or(ANONYMOUS)
        .to_string()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/components", get(list_components))
        .route("/api/components/{class}", get(describe_component))
        .route("/api/compositions", post(create_composition))
        .route(
            "/api/compositions/{id}",
            get(get_composition).put(put_composition),
        )
        .route("/api/compositions/{id}/share", post(share_composition))
        .route("/api/runs", post(submit_run))
        .route("/api/runs/{id}", get(get_run))
        .route("/api/runs/{id}/outputs", get(list_outputs))
        .route("/api/runs/{id}/outputs/{name}", get(get_output))
        .route("/api/citation", post(citation))
        .with_state(state)
}

async fn list_components(State(s): State<Arc<AppState>>) -> Json<Vec<String>> {
    Json(
        s.catalog
            .registry()
            .list_components()
            .iter()
            .map(|m| m.class.clone())
            .collect(),
    )
}

async fn describe_component(
    State(s): State<Arc<AppState>>,
    Path(class): Path<String>,
) -> ApiResult<Json<ComponentMeta>> {
    s.catalog
        .registry()
        .describe(&class)
        .map(|m| Json(m.clone()))
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e))
}

/// Loads and validates a document; structural errors are 400s, semantic
/// findings are returned to the caller.
fn check_document(catalog: &Catalog, body: &[u8]) -> ApiResult<Vec<Finding>> {
    let text = std::str::from_utf8(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("body is not UTF-8: {e}")))?;
    let composition =
        load_composition(text, catalog).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    Ok(validate_composition(&composition, catalog))
}

fn findings_body(id: &str, findings: &[Finding]) -> Value {
    json!({
        "id": id,
        "findings": findings,
        "messages": findings.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
    })
}

async fn create_composition(
    State(s): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let findings = check_document(&s.catalog, &body)?;
    let id = s.store.create_composition(&user(&headers), &body)?;
    Ok((StatusCode::CREATED, Json(findings_body(&id, &findings))))
}

fn readable(s: &AppState, id: &str, headers: &HeaderMap) -> ApiResult<Vec<u8>> {
    let (meta, doc) = s.store.composition(id)?;
    if !meta.shared && meta.owner != user(headers) {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            format!("composition {id} is not shared"),
        ));
    }
    Ok(doc)
}

fn owned(s: &AppState, id: &str, headers: &HeaderMap) -> ApiResult<()> {
    let (meta, _) = s.store.composition(id)?;
    if meta.owner != user(headers) {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            format!("composition {id} belongs to {}", meta.owner),
        ));
    }
    Ok(())
}

async fn get_composition(
    State(s): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let doc = readable(&s, &id, &headers)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], doc).into_response())
}

async fn put_composition(
    State(s): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    owned(&s, &id, &headers)?;
    let findings = check_document(&s.catalog, &body)?;
    s.store.replace_composition(&id, &body)?;
    Ok(Json(findings_body(&id, &findings)))
}

async fn share_composition(
    State(s): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Json<Value>> {
    owned(&s, &id, &headers)?;
    let meta = s.store.share_composition(&id)?;
    Ok(Json(
        json!({ "id": id, "owner": meta.owner, "shared": meta.shared }),
    ))
}

#[derive(Deserialize)]
struct SubmitRun {
    composition_id: String,
}

async fn submit_run(
    State(s): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let req: SubmitRun =
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let doc = readable(&s, &req.composition_id, &headers)?;
    let findings = check_document(&s.catalog, &doc)?;
    if !findings.is_empty() {
        return Err(ApiError::with_findings(
            StatusCode::CONFLICT,
            "composition has validation findings",
            &findings,
        ));
    }
    let record = s.store.create_run(
        &req.composition_id,
        &user(&headers),
        &doc,
        s.executor.next_sequence(),
    )?;
    s.executor.enqueue(record.run_id.clone());
    Ok((
        StatusCode::CREATED,
        Json(serde_json::to_value(record).expect("record serializes")),
    ))
}

async fn get_run(State(s): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let record = s.store.run(&id)?;
    Ok(Json(
        serde_json::to_value(record).expect("record serializes"),
    ))
}

async fn list_outputs(
    State(s): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<Vec<String>>> {
    Ok(Json(s.store.run(&id)?.outputs))
}

async fn get_output(
    State(s): State<Arc<AppState>>,
    Path((id, name)): Path<(String, String)>,
) -> ApiResult<Response> {
    let bytes = s.store.run_output(&id, &name)?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], bytes).into_response())
}

async fn citation(body: Bytes) -> ApiResult<Json<Value>> {
    let meta: ComponentMeta =
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let text = format_citation(&meta).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    Ok(Json(json!({ "citation": text })))
}
