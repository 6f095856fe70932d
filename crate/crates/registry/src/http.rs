use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::{Registry, RegistryError};

#[derive(Deserialize)]
struct NewContract {
    name: String,
    contract: String,
}

#[derive(Deserialize)]
struct Query {
    client: String,
}

struct ApiError(RegistryError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0 {
            RegistryError::Contract(_) => StatusCode::BAD_REQUEST,
            RegistryError::NotFound(_) => StatusCode::NOT_FOUND,
            RegistryError::Io(_) | RegistryError::Corrupt { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({"error": self.0.to_string()}))).into_response()
    }
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        ApiError(e)
    }
}

type Shared = State<Arc<Registry>>;

async fn add(State(r): Shared, Json(body): Json<NewContract>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let record = r.register(&body.name, &body.contract)?;
    Ok((StatusCode::CREATED, Json(json!({"id": record.id}))))
}

async fn list(State(r): Shared) -> Json<Value> {
    let snap = r.snapshot();
    Json(Value::Array(snap.records().map(|c| c.to_json()).collect()))
}

async fn fetch(State(r): Shared, Path(id): Path<u64>) -> Result<Json<Value>, ApiError> {
    let snap = r.snapshot();
    let record = snap.get(id).ok_or(RegistryError::NotFound(id))?;
    Ok(Json(record.to_json()))
}

async fn delete(State(r): Shared, Path(id): Path<u64>) -> Result<Json<Value>, ApiError> {
    Ok(Json(r.remove(id)?.to_json()))
}

async fn query(State(r): Shared, Json(body): Json<Query>) -> Result<Json<Value>, ApiError> {
    let out = r.query(&body.client)?;
    let matches: Vec<Value> = out.matches.iter().map(|m| json!({"id": m.id, "name": m.name})).collect();
    Ok(Json(json!({"matches": matches, "checks": out.checks})))
}

async fn preorder(State(r): Shared) -> Json<Value> {
    Json(r.snapshot().index().to_json())
}

pub fn router(registry: Arc<Registry>) -> Router {
    Router::new()
        .route("/contracts", post(add).get(list))
        .route("/contracts/{id}", get(fetch).delete(delete))
        .route("/query", post(query))
        .route("/preorder", get(preorder))
        .with_state(registry)
}
