use axum::extract::rejection::{JsonRejection, PathRejection};
use axum::extract::{Path, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use beanrec_core::api::{AttributeRange, Health, Metadata, RecommendRequest, RecommendResponse};
use beanrec_core::recommender::{recommend, SpaceEntry};
use beanrec_core::subjective::SCORE_MAX;
use tower_http::cors::CorsLayer;
use tower_http::trace::TraceLayer;

use crate::error::ApiError;
use crate::state::AppState;

pub fn router(state: AppState, dev_cors: bool) -> Router {
    let app = Router::new()
        .route("/health", get(health))
        .route("/metadata", get(metadata))
        .route("/beans/{id}", get(bean))
        .route("/recommend", post(recommend_handler))
        .layer(TraceLayer::new_for_http())
        .with_state(state);
    if dev_cors {
        app.layer(CorsLayer::permissive())
    } else {
        app
    }
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        space_fingerprint: state.current().space.fingerprint.clone(),
    })
}

async fn metadata(State(state): State<AppState>) -> Json<Metadata> {
    let cur = state.current();
    Json(Metadata {
        attributes: AttributeRange::all(),
        default_k: state.default_k.min(cur.space.len()),
        max_k: cur.space.len(),
        medians: cur.medians,
        reviewed: cur.reviewed,
        predicted: cur.predicted,
        space_fingerprint: cur.space.fingerprint.clone(),
    })
}

async fn bean(
    State(state): State<AppState>,
    id: Result<Path<usize>, PathRejection>,
) -> Result<Json<SpaceEntry>, ApiError> {
    let Path(id) = id?;
    state
        .current()
        .space
        .get(id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no bean with id {id}")))
}

async fn recommend_handler(
    State(state): State<AppState>,
    body: Result<Json<RecommendRequest>, JsonRejection>,
) -> Result<Json<RecommendResponse>, ApiError> {
    let Json(req) = body?;
    if let Some((attr, v)) = req.preferences.out_of_range(0.0, SCORE_MAX) {
        return Err(ApiError::invalid(
            format!("preferences.{}", attr.name()),
            format!("{} = {v} is outside [0, 10]", attr.name()),
        ));
    }
    let cur = state.current();
    let k = req.k.unwrap_or(state.default_k.min(cur.space.len()));
    if k == 0 || k > cur.space.len() {
        return Err(ApiError::invalid("k", format!("k = {k} is outside [1, {}]", cur.space.len())));
    }
    let recommendations = recommend(&cur.space, &req.preferences, k).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(RecommendResponse {
        k,
        recommendations,
        space_fingerprint: cur.space.fingerprint.clone(),
    }))
}
