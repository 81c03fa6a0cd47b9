//! Read-only HTTP API over a precomputed index snapshot.
//!
//! The current [`Catalog`] lives behind an atomic pointer. Each request loads
//! it exactly once, so a concurrent [`AppState::swap`] never produces a
//! response that mixes two builds.

use std::future::Future;
use std::path::Path;
use std::sync::Arc;

use arc_swap::ArcSwapOption;
use axum::body::Body;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use equate_core::payload::{to_body, Catalog, ClusterQuery, LanguagesQuery, StatsKind};
use equate_core::snapshot::ApiSnapshot;
use serde_json::json;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const OPENAPI_JSON: &str = include_str!("openapi.json");
pub const BUILD_ID_HEADER: &str = "x-equate-build-id";

#[derive(Default)]
pub struct AppState {
    current: ArcSwapOption<Catalog>,
}

impl AppState {
    pub fn new(catalog: Option<Catalog>) -> Self {
        Self {
            current: ArcSwapOption::from(catalog.map(Arc::new)),
        }
    }

    /// Publishes `catalog`; returns the one it replaced.
    pub fn swap(&self, catalog: impl Into<Arc<Catalog>>) -> Option<Arc<Catalog>> {
        self.current.swap(Some(catalog.into()))
    }

    pub fn current(&self) -> Option<Arc<Catalog>> {
        self.current.load_full()
    }
}

pub fn load_catalog(path: &Path) -> equate_core::Result<Catalog> {
    let bytes = std::fs::read(path)?;
    Ok(Catalog::new(ApiSnapshot::from_json(&bytes)?))
}

fn json_response(status: StatusCode, build_id: Option<&str>, body: Vec<u8>) -> Response {
    let mut resp = Response::new(Body::from(body));
    *resp.status_mut() = status;
    let headers = resp.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    if let Some(id) = build_id.and_then(|id| HeaderValue::from_str(id).ok()) {
        headers.insert(BUILD_ID_HEADER, id);
    }
    resp
}

fn error(status: StatusCode, build_id: Option<&str>, msg: &str) -> Response {
    json_response(status, build_id, to_body(&json!({ "error": msg, "build_id": build_id })))
}

fn unavailable() -> Response {
    error(StatusCode::SERVICE_UNAVAILABLE, None, "no snapshot loaded")
}

type Pairs = Result<Query<Vec<(String, String)>>, QueryRejection>;

fn pairs(q: &Pairs) -> Result<Vec<(&str, &str)>, String> {
    match q {
        Ok(Query(v)) => Ok(v.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect()),
        Err(e) => Err(e.body_text()),
    }
}

async fn languages(State(state): State<Arc<AppState>>, q: Pairs) -> Response {
    let Some(cat) = state.current() else {
        return unavailable();
    };
    let id = Some(cat.build_id());
    let parsed = pairs(&q).and_then(|p| LanguagesQuery::from_pairs(p).map_err(|e| e.to_string()));
    match parsed {
        Ok(query) => json_response(StatusCode::OK, id, to_body(&cat.languages(&query))),
        Err(e) => error(StatusCode::BAD_REQUEST, id, &e),
    }
}

async fn language_detail(State(state): State<Arc<AppState>>, UrlPath(code): UrlPath<String>) -> Response {
    let Some(cat) = state.current() else {
        return unavailable();
    };
    let id = Some(cat.build_id());
    match cat.detail(&code) {
        Some(d) => json_response(StatusCode::OK, id, to_body(&d)),
        None => error(StatusCode::NOT_FOUND, id, &format!("unknown glottocode `{code}`")),
    }
}

async fn clusters(State(state): State<Arc<AppState>>, q: Pairs) -> Response {
    let Some(cat) = state.current() else {
        return unavailable();
    };
    let id = Some(cat.build_id());
    let parsed = pairs(&q).and_then(|p| ClusterQuery::from_pairs(p).map_err(|e| e.to_string()));
    match parsed {
        Ok(query) => json_response(StatusCode::OK, id, to_body(&cat.clusters(&query))),
        Err(e) => error(StatusCode::BAD_REQUEST, id, &e),
    }
}

async fn stats(State(state): State<Arc<AppState>>, UrlPath(kind): UrlPath<String>) -> Response {
    let Some(cat) = state.current() else {
        return unavailable();
    };
    let id = Some(cat.build_id());
    let Ok(kind) = kind.parse::<StatsKind>() else {
        return error(StatusCode::NOT_FOUND, id, &format!("unknown stats kind `{kind}`"));
    };
    match cat.stats(kind) {
        Some(v) => json_response(StatusCode::OK, id, to_body(&v)),
        None => error(
            StatusCode::NOT_FOUND,
            id,
            &format!("{} fit is not available in this snapshot", kind.as_str()),
        ),
    }
}

async fn openapi() -> Response {
    json_response(StatusCode::OK, None, OPENAPI_JSON.as_bytes().to_vec())
}

async fn not_found(State(state): State<Arc<AppState>>) -> Response {
    let cat = state.current();
    error(StatusCode::NOT_FOUND, cat.as_deref().map(Catalog::build_id), "no such route")
}

/// `origins = None` allows any origin.
pub fn router(state: Arc<AppState>, origins: Option<Vec<HeaderValue>>) -> Router {
    let allow = match origins {
        Some(list) => AllowOrigin::list(list),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET])
        .expose_headers([header::HeaderName::from_static(BUILD_ID_HEADER)]);
    Router::new()
        .route("/v1/languages", get(languages))
        .route("/v1/languages/{glottocode}", get(language_detail))
        .route("/v1/map/clusters", get(clusters))
        .route("/v1/stats/{kind}", get(stats))
        .route("/v1/openapi", get(openapi))
        .fallback(not_found)
        .layer(cors)
        .with_state(state)
}

pub async fn serve(
    listener: TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}
