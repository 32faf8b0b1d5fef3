use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use chrono::Utc;
use polygreen::deformer::{build_field, grid_lattice, write_field, DeformedCage};
use polygreen::io::{Basis, CageDocument};
use polygreen::Vec2;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::session::{AppState, Session, StoredImage};

pub const GRID_RES_RANGE: std::ops::RangeInclusive<i64> = 8..=512;
pub const TARGET_ORDER_RANGE: std::ops::RangeInclusive<i64> = 1..=8;
/// Largest accepted request body, images included.
pub const MAX_BODY_BYTES: usize = 64 << 20;

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

    fn with(mut self, key: &str, value: impl serde::Serialize) -> Self {
        self.body[key] = json!(value);
        self
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("invalid request body: {e}"),
        )
    })
}

pub fn router(state: AppState) -> Router {
    let origins = &state.config.allowed_origins;
    let allow_origin = if origins.is_empty() {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    let cors = CorsLayer::new()
        .allow_origin(allow_origin)
        .allow_methods([Method::GET, Method::POST, Method::PUT, Method::DELETE])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info).delete(delete_session))
        .route("/sessions/{id}/cage", put(deform_session))
        .route(
            "/sessions/{id}/image",
            post(upload_image).get(download_image),
        )
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .layer(cors)
        .with_state(state)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    cage: CageDocument,
    grid_res: i64,
    target_order: i64,
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: CreateRequest = parse_body(&body)?;
    if !GRID_RES_RANGE.contains(&req.grid_res) {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("grid_res must be in {GRID_RES_RANGE:?}"),
        )
        .with("field", "grid_res"));
    }
    if !TARGET_ORDER_RANGE.contains(&req.target_order) {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("target_order must be in {TARGET_ORDER_RANGE:?}"),
        )
        .with("field", "target_order"));
    }
    let (grid_res, target_order) = (req.grid_res as usize, req.target_order as usize);
    let cage = req
        .cage
        .to_cage()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let report = cage.validate();
    if !report.is_valid() {
        return Err(
            ApiError::new(StatusCode::BAD_REQUEST, format!("invalid cage: {report}"))
                .with("report", &report),
        );
    }
    let built = tokio::task::spawn_blocking(move || {
        let lattice = grid_lattice(&cage, grid_res)?;
        let field = build_field(&cage, &lattice.points, target_order)?;
        Ok::<_, polygreen::deformer::DeformError>((cage, lattice, field))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))?;
    let (cage, lattice, field) = built.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    if let Some(path) = state.snapshot_path(&id) {
        let written = std::fs::File::create(&path)
            .map_err(polygreen::deformer::DeformError::from)
            .and_then(|f| write_field(&field, std::io::BufWriter::new(f)));
        if let Err(e) = written {
            eprintln!("warning: snapshot {} failed: {e}", path.display());
        }
    }
    let session = state.insert(Session {
        id,
        cage,
        lattice,
        field,
        grid_res,
        target_order,
        created_at: Utc::now(),
    });
    let body = json!({
        "id": session.id,
        "rest_grid": session.lattice.points,
        "triangles": session.lattice.triangles,
    });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

fn default_basis() -> Basis {
    Basis::Bezier
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeformRequest {
    #[serde(default = "default_basis")]
    basis: Basis,
    curves: Vec<Vec<Vec2>>,
}

async fn deform_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let session = state.get(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let req: DeformRequest = parse_body(&body)?;
    if req.curves.len() != session.cage.len() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            format!(
                "the session cage has {} curves, got {}",
                session.cage.len(),
                req.curves.len()
            ),
        )
        .with("expected_curves", session.cage.len()));
    }
    let n_t = session.target_order;
    if let Some(i) = req.curves.iter().position(|c| c.len() != n_t + 1) {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            format!(
                "curve {i} has {} points; the session expects order {n_t} ({} points per curve)",
                req.curves[i].len(),
                n_t + 1
            ),
        )
        .with("expected_order", n_t));
    }
    let deformed = match req.basis {
        Basis::Bezier => DeformedCage::from_bezier(&req.curves),
        Basis::Monomial => DeformedCage::from_monomial(req.curves),
    }
    .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let grid = session
        .field
        .deform(&deformed)
        .map_err(|e| ApiError::new(StatusCode::CONFLICT, e))?;
    Ok(Json(json!({ "deformed_grid": grid })))
}

async fn session_info(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<Value>> {
    let s = state.get(&id).ok_or_else(|| ApiError::not_found(&id))?;
    Ok(Json(json!({
        "id": s.id,
        "grid_res": s.grid_res,
        "target_order": s.target_order,
        "created_at": s.created_at,
        "curve_count": s.cage.len(),
        "curve_orders": s.field.source_orders(),
        "point_count": s.lattice.points.len(),
        "triangle_count": s.lattice.triangles.len(),
        "coefficient_ceiling": s.field.ceiling(),
        "signature": s.field.signature(),
        "has_image": state.has_image(&id),
        "cage": CageDocument::from_cage(&s.cage, Basis::Bezier),
    })))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> StatusCode {
    if state.remove(&id).is_some() {
        if let Some(path) = state.snapshot_path(&id) {
            let _ = std::fs::remove_file(path);
        }
    }
    StatusCode::NO_CONTENT
}

async fn upload_image(
    State(state): State<AppState>,
    Path(id): Path<String>,
    mut multipart: Multipart,
) -> ApiResult<Response> {
    if state.get(&id).is_none() {
        return Err(ApiError::not_found(&id));
    }
    let bad =
        |e: axum::extract::multipart::MultipartError| ApiError::new(StatusCode::BAD_REQUEST, e);
    while let Some(field) = multipart.next_field().await.map_err(bad)? {
        if field.name() != Some("image") && field.file_name().is_none() {
            continue;
        }
        let content_type = field
            .content_type()
            .unwrap_or("application/octet-stream")
            .to_owned();
        let bytes = field.bytes().await.map_err(bad)?.to_vec();
        let size = bytes.len();
        if !state.set_image(
            &id,
            StoredImage {
                content_type: content_type.clone(),
                bytes,
            },
        ) {
            return Err(ApiError::not_found(&id));
        }
        let body = json!({ "content_type": content_type, "bytes": size });
        return Ok((StatusCode::CREATED, Json(body)).into_response());
    }
    Err(ApiError::new(
        StatusCode::BAD_REQUEST,
        "multipart body has no `image` field",
    ))
}

async fn download_image(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    if state.get(&id).is_none() {
        return Err(ApiError::not_found(&id));
    }
    let image = state.image(&id).ok_or_else(|| {
        ApiError::new(StatusCode::NOT_FOUND, format!("session {id} has no image"))
    })?;
    Ok(([(header::CONTENT_TYPE, image.content_type)], image.bytes).into_response())
}
