use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;
use vaxstance_core::corpus::{apply_filters, parse_jsonl_line};
use vaxstance_core::models::Prediction;

use crate::error::{ApiError, LineError};
use crate::state::{ActiveModel, AppState};
use crate::store::{ReviewItem, ReviewStatus, Stats, Verdict};

type Shared = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/api/predict", post(predict))
        .route("/api/ingest", post(ingest))
        .route("/api/review/queue", get(queue))
        .route("/api/review/{tweet_id}", post(review))
        .route("/api/retrain", post(retrain))
        .route("/api/stats", get(stats));
    let app = match &state.config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.with_state(state)
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("invalid JSON body: {e}")))
}

fn active_model(state: &AppState) -> Result<Arc<ActiveModel>, ApiError> {
    state.model().ok_or(ApiError::NoModel)
}

fn predict_with(model: &ActiveModel, text: &str) -> Result<Prediction, ApiError> {
    model
        .artifact
        .predict_text(text)
        .map_err(|e| ApiError::Internal(format!("prediction failed: {e}")))
}

#[derive(Deserialize)]
struct PredictRequest {
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictResponse {
    pub label: String,
    pub negative_score: f64,
    pub scores: Vec<ClassScore>,
    pub model_version: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClassScore {
    pub label: String,
    pub score: f64,
    pub pseudo_prob: f64,
}

async fn predict(State(state): Shared, body: Bytes) -> Result<Json<PredictResponse>, ApiError> {
    let req: PredictRequest = parse_body(&body)?;
    if req.text.trim().is_empty() {
        return Err(ApiError::BadRequest("text must not be empty".into()));
    }
    let model = active_model(&state)?;
    let p = predict_with(&model, &req.text)?;
    Ok(Json(PredictResponse {
        negative_score: p.negative_score(),
        scores: p
            .classes
            .iter()
            .zip(&p.scores)
            .zip(&p.pseudo_prob)
            .map(|((label, score), prob)| ClassScore { label: label.clone(), score: *score, pseudo_prob: *prob })
            .collect(),
        label: p.label,
        model_version: model.version,
    }))
}

#[derive(Deserialize)]
struct IngestParams {
    strict: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IngestResponse {
    pub queued: usize,
    pub received: usize,
    pub filtered_out: usize,
    pub rejected: Vec<RejectedLine>,
    pub model_version: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RejectedLine {
    pub line: usize,
    pub message: String,
}

async fn ingest(
    State(state): Shared,
    Query(params): Query<IngestParams>,
    body: String,
) -> Result<Json<IngestResponse>, ApiError> {
    let strict = params.strict.unwrap_or(true);
    let model = active_model(&state)?;
    let mut tweets = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_jsonl_line(line, idx + 1) {
            Ok(t) => tweets.push(t),
            Err(e) => errors.push(LineError { line: idx + 1, message: e.to_string() }),
        }
    }
    if strict && !errors.is_empty() {
        return Err(ApiError::MalformedLines(errors));
    }
    let received = tweets.len();
    let (kept, _) = apply_filters(&tweets, &state.config.filter);
    let mut flagged = Vec::new();
    for tweet in &kept {
        let p = predict_with(&model, &tweet.text)?;
        let score = p.negative_score();
        let flag = match state.config.flag_threshold {
            Some(t) => score >= t,
            None => p.is_negative(),
        };
        if flag {
            flagged.push(ReviewItem {
                tweet_id: tweet.id.clone(),
                text: tweet.text.clone(),
                negative_score: score,
                predicted_label: p.label,
                status: ReviewStatus::Pending,
                verdict_time: None,
            });
        }
    }
    let queued = state.store().enqueue(flagged)?;
    Ok(Json(IngestResponse {
        queued,
        received,
        filtered_out: received - kept.len(),
        rejected: errors.into_iter().map(|e| RejectedLine { line: e.line, message: e.message }).collect(),
        model_version: model.version,
    }))
}

#[derive(Deserialize)]
struct QueueParams {
    limit: Option<usize>,
}

async fn queue(State(state): Shared, Query(params): Query<QueueParams>) -> Json<Vec<ReviewItem>> {
    Json(state.store().pending(params.limit))
}

#[derive(Deserialize)]
struct ReviewRequest {
    verdict: Verdict,
}

async fn review(
    State(state): Shared,
    Path(tweet_id): Path<String>,
    body: Bytes,
) -> Result<Json<ReviewItem>, ApiError> {
    let req: ReviewRequest = parse_body(&body)?;
    Ok(Json(state.store().judge(&tweet_id, req.verdict)?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RetrainResponse {
    pub model_version: u64,
    pub train_size: usize,
}

async fn retrain(State(state): Shared) -> Result<Json<RetrainResponse>, ApiError> {
    let guard = state
        .try_begin_retrain()
        .ok_or_else(|| ApiError::Conflict("a retrain is already running".into()))?;
    let worker = state.clone();
    let (model_version, train_size) = tokio::task::spawn_blocking(move || {
        let _guard = guard;
        worker.retrain()
    })
    .await
    .map_err(|e| ApiError::Internal(format!("retrain task failed: {e}")))??;
    Ok(Json(RetrainResponse { model_version, train_size }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatsResponse {
    #[serde(flatten)]
    pub stats: Stats,
    pub total: usize,
    pub model_version: Option<u64>,
}

async fn stats(State(state): Shared) -> Json<StatsResponse> {
    let stats = state.store().stats();
    Json(StatsResponse {
        total: stats.pending + stats.confirmed + stats.rejected,
        stats,
        model_version: state.model().map(|m| m.version),
    })
}
