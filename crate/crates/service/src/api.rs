use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderName, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use tiltwarp::formats::parse_mesh;
use tiltwarp::{decode_image, encode_png, Boundary, Mesh64, Pipeline, DEFAULT_GRID, DEFAULT_WORK_RES};

use crate::error::ApiError;
use crate::render::{render_export, render_preview, write_export};
use crate::session::{EditSession, MoveOutcome, DEFAULT_UNDO_DEPTH};

pub const REVISION_HEADER: &str = "x-revision";
pub const DEFAULT_PREVIEW_DIM: usize = 512;
const MAX_PREVIEW_DIM: usize = 8192;
const BODY_LIMIT: usize = 256 << 20;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub work_res: (usize, usize),
    pub grid: (usize, usize),
    pub boundary: Boundary,
    pub undo_depth: usize,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            work_res: DEFAULT_WORK_RES,
            grid: DEFAULT_GRID,
            boundary: Boundary::default(),
            undo_depth: DEFAULT_UNDO_DEPTH,
        }
    }
}

pub struct AppState {
    config: ServiceConfig,
    pipeline: Pipeline,
    sessions: RwLock<HashMap<String, Arc<EditSession>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> tiltwarp::Result<Self> {
        let pipeline = Pipeline::new(config.work_res.0, config.work_res.1, config.boundary)?;
        Ok(Self {
            config,
            pipeline,
            sessions: RwLock::new(HashMap::new()),
        })
    }

    fn session(&self, id: &str) -> Result<Arc<EditSession>, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session `{id}`")))
    }

    fn insert(&self, make: impl FnOnce(String) -> Result<EditSession, ApiError>) -> Result<Arc<EditSession>, ApiError> {
        let mut map = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        let id = loop {
            let id = format!("{:032x}", rand::random::<u128>());
            if !map.contains_key(&id) {
                break id;
            }
        };
        let s = Arc::new(make(id.clone())?);
        map.insert(id, Arc::clone(&s));
        Ok(s)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/mesh", get(get_mesh))
        .route("/sessions/{id}/move", post(move_vertex))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/redo", post(redo))
        .route("/sessions/{id}/preview", get(preview))
        .route("/sessions/{id}/export", post(export))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct MeshJson {
    pub width: usize,
    pub height: usize,
    pub cols: usize,
    pub rows: usize,
    pub vertices: Vec<[f64; 2]>,
}

impl From<&Mesh64> for MeshJson {
    fn from(m: &Mesh64) -> Self {
        Self {
            width: m.frame_width(),
            height: m.frame_height(),
            cols: m.cols(),
            rows: m.rows(),
            vertices: m.vertices().iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Deserialize)]
struct CreateRequest {
    image: String,
    mesh: Option<String>,
    cols: Option<usize>,
    rows: Option<usize>,
}

async fn create_session(State(app): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let grid = (req.cols.unwrap_or(app.config.grid.0), req.rows.unwrap_or(app.config.grid.1));
    let undo_depth = app.config.undo_depth;
    let app2 = Arc::clone(&app);
    let session = blocking(move || {
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(req.image.as_bytes())
            .map_err(|e| ApiError::bad_request(format!("image is not valid base64: {e}")))?;
        let image = decode_image(&bytes)?;
        let mesh = req.mesh.as_deref().map(parse_mesh).transpose()?;
        app2.insert(|id| EditSession::new(id, image, mesh, grid, undo_depth))
    })
    .await?;
    let (revision, mesh) = session.snapshot();
    let body = json!({
        "id": session.id(),
        "revision": revision,
        "width": session.source().width(),
        "height": session.source().height(),
        "mesh": MeshJson::from(&*mesh),
    });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn get_mesh(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.session(&id)?;
    let (revision, mesh) = s.snapshot();
    Ok(Json(json!({ "id": id, "revision": revision, "mesh": MeshJson::from(&*mesh) })))
}

#[derive(Deserialize)]
struct MoveRequest {
    i: usize,
    j: usize,
    m: f64,
    n: f64,
    revision: Option<u64>,
}

async fn move_vertex(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let req: MoveRequest = parse_body(&body)?;
    let s = app.session(&id)?;
    let out = match s.move_vertex(req.i, req.j, req.m, req.n, req.revision)? {
        MoveOutcome::Accepted { revision } => {
            json!({ "accepted": true, "revision": revision, "rejected_cell": null })
        }
        MoveOutcome::Rejected { revision, cell } => {
            json!({ "accepted": false, "revision": revision, "rejected_cell": [cell.0, cell.1] })
        }
    };
    Ok(Json(out))
}

fn history_response(s: &EditSession, applied: Option<u64>) -> Json<Value> {
    let (revision, _) = s.snapshot();
    Json(json!({ "applied": applied.is_some(), "revision": applied.unwrap_or(revision) }))
}

async fn undo(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.session(&id)?;
    let r = s.undo();
    Ok(history_response(&s, r))
}

async fn redo(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.session(&id)?;
    let r = s.redo();
    Ok(history_response(&s, r))
}

#[derive(Deserialize)]
struct PreviewQuery {
    max_dim: Option<usize>,
}

async fn preview(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<PreviewQuery>,
) -> Result<Response, ApiError> {
    let max_dim = q.max_dim.unwrap_or(DEFAULT_PREVIEW_DIM);
    if max_dim == 0 || max_dim > MAX_PREVIEW_DIM {
        return Err(ApiError::bad_request(format!("max_dim must be in 1..={MAX_PREVIEW_DIM}")));
    }
    let s = app.session(&id)?;
    let (revision, mesh) = s.snapshot();
    let boundary = app.config.boundary;
    let png = blocking(move || Ok(encode_png(&render_preview(s.source(), &mesh, max_dim, boundary)?)?)).await?;
    Ok((
        [
            (header::CONTENT_TYPE, "image/png".to_string()),
            (HeaderName::from_static(REVISION_HEADER), revision.to_string()),
        ],
        png,
    )
        .into_response())
}

async fn export(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = app.session(&id)?;
    let (revision, mesh) = s.snapshot();
    let dir = app.config.data_dir.join(&id);
    let pipeline = app.pipeline;
    let files = blocking(move || {
        let (corrected, flow) = render_export(s.source(), &mesh, &pipeline)?;
        write_export(&dir, &corrected, &mesh, &flow)
    })
    .await?;
    Ok(Json(json!({
        "revision": revision,
        "files": {
            "corrected": files.corrected,
            "mesh": files.mesh,
            "flow": files.flow,
        },
        "work_res": [pipeline.work_res().0, pipeline.work_res().1],
    })))
}
