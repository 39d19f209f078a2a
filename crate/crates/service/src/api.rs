use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{middleware, Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use turkpos::tagger::{export_analysis, tag_with_source, ExportFormat, Source, TagError};
use turkpos::Correction;

use crate::state::{AppState, JobStatus, RetrainRejected};
use crate::store::{AnalysisRecord, CorrectionRecord};

pub const API_VERSION: &str = "1";
pub const API_VERSION_HEADER: &str = "x-api-version";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        tracing::error!(error = %e, "request failed");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    let limit = state.config().max_body_bytes;
    Router::new()
        .route("/api/analyses", post(create_analysis))
        .route("/api/documents", post(create_document))
        .route("/api/analyses/{id}", get(get_analysis))
        .route("/api/analyses/{id}/export", get(export))
        .route("/api/tagset", get(tagset))
        .route("/api/model", get(model_info))
        .route("/api/corrections", post(create_correction).get(list_corrections))
        .route("/api/corrections/{id}", get(get_correction))
        .route("/api/admin/retrain", post(start_retrain).get(retrain_status))
        .layer(DefaultBodyLimit::max(limit))
        .layer(middleware::map_response(stamp_version))
        .with_state(state)
}

async fn stamp_version(mut response: Response) -> Response {
    response
        .headers_mut()
        .insert(API_VERSION_HEADER, HeaderValue::from_static(API_VERSION));
    response
}

#[derive(Deserialize)]
struct AnalyzeRequest {
    text: String,
}

async fn create_analysis(
    State(state): State<Arc<AppState>>,
    body: Result<Bytes, axum::extract::rejection::BytesRejection>,
) -> ApiResult<(StatusCode, Json<AnalysisRecord>)> {
    let body = body.map_err(|e| ApiError::bad_request(format!("unreadable body: {e}")))?;
    let request: AnalyzeRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("expected {{\"text\": ...}}: {e}")))?;
    analyze(state, request.text, Source::Text).await
}

/// Plain-text upload, either as a multipart form (first file field) or as
/// the raw request body with an optional `?filename=`.
async fn create_document(
    State(state): State<Arc<AppState>>,
    Query(query): Query<DocumentQuery>,
    request: Request,
) -> ApiResult<(StatusCode, Json<AnalysisRecord>)> {
    let is_multipart = request
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    let (filename, bytes) = if is_multipart {
        let mut form = Multipart::from_request(request, &())
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?;
        let field = form
            .next_field()
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?
            .ok_or_else(|| ApiError::bad_request("multipart form has no file"))?;
        let filename = field.file_name().map(str::to_string).or(query.filename);
        let bytes = field.bytes().await.map_err(|e| ApiError::bad_request(e.body_text()))?;
        (filename, bytes)
    } else {
        let bytes = Bytes::from_request(request, &())
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?;
        (query.filename, bytes)
    };
    if bytes.is_empty() {
        return Err(ApiError::bad_request("empty document"));
    }
    let text = String::from_utf8(bytes.to_vec())
        .map_err(|_| ApiError::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, "documents must be UTF-8 plain text"))?;
    analyze(state, text, Source::Document { filename }).await
}

#[derive(Deserialize)]
struct DocumentQuery {
    filename: Option<String>,
}

async fn analyze(state: Arc<AppState>, text: String, source: Source) -> ApiResult<(StatusCode, Json<AnalysisRecord>)> {
    if text.trim().is_empty() {
        return Err(ApiError::bad_request("text is empty"));
    }
    if text.len() > state.config().max_body_bytes {
        return Err(ApiError::bad_request("text exceeds the size limit"));
    }
    let serving = state
        .model()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no model loaded"))?;
    let record = tokio::task::spawn_blocking(move || {
        let result = tag_with_source(&text, &serving.model, source.clone()).map_err(|e| match e {
            TagError::EmptyAfterCleaning => ApiError::bad_request(e.to_string()),
            other => ApiError::internal(other),
        })?;
        let record = AnalysisRecord {
            id: uuid::Uuid::new_v4().to_string(),
            created_at: Utc::now(),
            source,
            input_hash: format!("{:x}", Sha256::digest(text.as_bytes())),
            result,
            model_version: serving.label(),
        };
        state.store().insert_analysis(record).map_err(ApiError::internal)
    })
    .await
    .map_err(ApiError::internal)??;
    Ok((StatusCode::CREATED, Json(AnalysisRecord::clone(&record))))
}

fn find_analysis(state: &AppState, id: &str) -> ApiResult<Arc<AnalysisRecord>> {
    state
        .store()
        .analysis(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no analysis {id}")))
}

async fn get_analysis(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<AnalysisRecord>> {
    Ok(Json(AnalysisRecord::clone(&*find_analysis(&state, &id)?)))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<ExportQuery>,
) -> ApiResult<Response> {
    let record = find_analysis(&state, &id)?;
    let format: ExportFormat = q
        .format
        .as_deref()
        .unwrap_or("tsv")
        .parse()
        .map_err(|e: TagError| ApiError::bad_request(e.to_string()))?;
    let content_type = match format {
        ExportFormat::Tsv => "text/tab-separated-values; charset=utf-8",
        ExportFormat::Structured => "application/json",
    };
    Ok((
        [(header::CONTENT_TYPE, content_type)],
        export_analysis(&record.result, format),
    )
        .into_response())
}

#[derive(Serialize)]
struct Tagset {
    model_version: String,
    /// Assignable tags in model id order.
    tags: Vec<String>,
}

async fn tagset(State(state): State<Arc<AppState>>) -> ApiResult<Json<Tagset>> {
    let serving = state
        .model()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no model loaded"))?;
    Ok(Json(Tagset {
        model_version: serving.label(),
        tags: serving.model.vocab().real_tags().to_vec(),
    }))
}

async fn model_info(State(state): State<Arc<AppState>>) -> ApiResult<Json<serde_json::Value>> {
    let serving = state
        .model()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no model loaded"))?;
    let hyper = serving.model.hyper();
    Ok(Json(json!({
        "model_version": serving.label(),
        "embed_dim": hyper.embed_dim,
        "hidden_dim": hyper.hidden_dim,
        "tags": serving.model.vocab().real_tags(),
        "vocabulary_size": serving.model.vocab().word_count(),
        "pending_corrections": state.store().pending_count(),
    })))
}

#[derive(Deserialize)]
struct CorrectionRequest {
    analysis_id: String,
    sentence_index: usize,
    token_index: usize,
    corrected_tag: String,
}

async fn create_correction(
    State(state): State<Arc<AppState>>,
    Json(req): Json<CorrectionRequest>,
) -> ApiResult<(StatusCode, Json<CorrectionRecord>)> {
    let record = find_analysis(&state, &req.analysis_id)?;
    let sentence = record.result.sentences.get(req.sentence_index).ok_or_else(|| {
        ApiError::unprocessable(format!(
            "sentence_index {} out of range ({} sentences)",
            req.sentence_index,
            record.result.sentences.len()
        ))
    })?;
    let original = sentence.tags.get(req.token_index).ok_or_else(|| {
        ApiError::unprocessable(format!(
            "token_index {} out of range ({} tokens)",
            req.token_index,
            sentence.tags.len()
        ))
    })?;
    let serving = state
        .model()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no model loaded"))?;
    if !serving.model.vocab().real_tags().contains(&req.corrected_tag) {
        return Err(ApiError::unprocessable(format!("unknown tag {:?}", req.corrected_tag)));
    }

    let stored = state
        .store()
        .submit_correction(|existing| {
            let current = existing
                .iter()
                .rev()
                .map(|r| &r.correction)
                .find(|c| {
                    c.analysis_id == req.analysis_id
                        && c.sentence_index == req.sentence_index
                        && c.token_index == req.token_index
                })
                .map_or(original, |c| &c.corrected_tag);
            if *current == req.corrected_tag {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    format!("token is already tagged {:?}", req.corrected_tag),
                ));
            }
            Ok(Correction {
                id: uuid::Uuid::new_v4().to_string(),
                analysis_id: req.analysis_id.clone(),
                sentence_index: req.sentence_index,
                token_index: req.token_index,
                original_tag: original.clone(),
                corrected_tag: req.corrected_tag.clone(),
                submitted_at: Utc::now(),
            })
        })
        .map_err(ApiError::internal)??;
    Ok((StatusCode::CREATED, Json(stored)))
}

async fn list_corrections(State(state): State<Arc<AppState>>) -> Json<Vec<CorrectionRecord>> {
    Json(state.store().corrections())
}

async fn get_correction(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<CorrectionRecord>> {
    state
        .store()
        .correction(&id)
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no correction {id}")))
}

async fn start_retrain(State(state): State<Arc<AppState>>) -> ApiResult<(StatusCode, Json<JobStatus>)> {
    match state.start_retrain() {
        Ok(status) => Ok((StatusCode::ACCEPTED, Json(status))),
        Err(e @ RetrainRejected::AlreadyRunning) => Err(ApiError::new(StatusCode::CONFLICT, e.to_string())),
        Err(e) => Err(ApiError::unprocessable(e.to_string())),
    }
}

async fn retrain_status(State(state): State<Arc<AppState>>) -> Json<JobStatus> {
    Json(state.job_status())
}
