//! JSON-over-HTTP API under `/api/v1`.

mod adapter;
mod error;

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;
use tower_http::cors::CorsLayer;

use crate::catalog::{load_snapshot, Catalog, CatalogDocument, CatalogError, Lexicon, SearchQuery};
use crate::fnv1a64;
use crate::graph::{
    derive_causal_graph, enumerate_loops, layout_with_hints, CausalGraph, FeedbackLoop, LayoutResult, LoopType,
};
use crate::model::ViewHint;
use crate::narrative::{
    apply_edits, copilot_respond, describe, from_structured, loop_ids, parse_controlled_nl, to_structured,
    CopilotAdapter, DeterministicAdapter, DiagramLink, ModelEdit, NarrativeWarning, StructuredDiagram,
    UnparsedSentence,
};

pub use adapter::HttpAdapter;
pub use error::{ApiError, ERROR_CODES};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_COPILOT_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_COPILOT_CONCURRENCY: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub snapshot: Option<PathBuf>,
    pub port: u16,
    pub copilot_url: Option<String>,
    pub cors_origin: Option<String>,
    pub copilot_timeout: Duration,
    pub copilot_concurrency: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            snapshot: None,
            port: DEFAULT_PORT,
            copilot_url: None,
            cors_origin: None,
            copilot_timeout: DEFAULT_COPILOT_TIMEOUT,
            copilot_concurrency: DEFAULT_COPILOT_CONCURRENCY,
        }
    }
}

impl ServiceConfig {
    /// Reads `SDATLAS_SNAPSHOT`, `SDATLAS_PORT`, `SDATLAS_COPILOT_URL` and
    /// `SDATLAS_CORS_ORIGIN`. Unset or empty variables keep the defaults.
    pub fn from_env() -> Result<Self, ServiceError> {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.trim().is_empty());
        let port = match var("SDATLAS_PORT") {
            Some(port) => port.trim().parse().map_err(|_| ServiceError::Config(format!("bad SDATLAS_PORT {port:?}")))?,
            None => DEFAULT_PORT,
        };
        Ok(Self {
            snapshot: var("SDATLAS_SNAPSHOT").map(PathBuf::from),
            port,
            copilot_url: var("SDATLAS_COPILOT_URL"),
            cors_origin: var("SDATLAS_CORS_ORIGIN"),
            ..Self::default()
        })
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no snapshot configured (pass --snapshot or set SDATLAS_SNAPSHOT)")]
    MissingSnapshot,
    #[error("cannot load snapshot: {0}")]
    Snapshot(#[from] CatalogError),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("{0}")]
    Config(String),
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// A catalog together with its per-document analysis cache.
struct CatalogView {
    catalog: Catalog,
    analysis: Mutex<HashMap<String, Bytes>>,
}

/// Shared handler state. Readers take a snapshot of the current catalog
/// view; [`AppState::replace_catalog`] swaps it atomically.
pub struct AppState {
    view: RwLock<Arc<CatalogView>>,
    lexicon: Lexicon,
    adapter: Arc<dyn CopilotAdapter>,
    permits: Arc<Semaphore>,
    copilot_timeout: Duration,
}

impl AppState {
    pub fn new(catalog: Catalog) -> Self {
        Self {
            view: RwLock::new(Arc::new(CatalogView { catalog, analysis: Mutex::default() })),
            lexicon: Lexicon::default(),
            adapter: Arc::new(DeterministicAdapter),
            permits: Arc::new(Semaphore::new(DEFAULT_COPILOT_CONCURRENCY)),
            copilot_timeout: DEFAULT_COPILOT_TIMEOUT,
        }
    }

    pub fn with_adapter(mut self, adapter: Arc<dyn CopilotAdapter>) -> Self {
        self.adapter = adapter;
        self
    }

    pub fn with_copilot_limits(mut self, timeout: Duration, concurrency: usize) -> Self {
        self.copilot_timeout = timeout;
        self.permits = Arc::new(Semaphore::new(concurrency.max(1)));
        self
    }

    pub fn with_lexicon(mut self, lexicon: Lexicon) -> Self {
        self.lexicon = lexicon;
        self
    }

    pub fn replace_catalog(&self, catalog: Catalog) {
        let fresh = Arc::new(CatalogView { catalog, analysis: Mutex::default() });
        *self.view.write().unwrap_or_else(|p| p.into_inner()) = fresh;
    }

    fn view(&self) -> Arc<CatalogView> {
        self.view.read().unwrap_or_else(|p| p.into_inner()).clone()
    }
}

/// JSON body extractor whose failures are `400 malformed_body` errors.
pub struct JsonBody<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for JsonBody<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state).await.map_err(|e| ApiError::malformed(e.body_text()))?;
        serde_json::from_slice(&bytes).map(JsonBody).map_err(|e| ApiError::malformed(e.to_string()))
    }
}

type Shared = State<Arc<AppState>>;

pub fn router(state: Arc<AppState>, cors_origin: Option<&str>) -> Router {
    let api = Router::new()
        .route("/documents/{id}", get(get_document))
        .route("/documents/{id}/analysis", get(get_analysis))
        .route("/documents/{id}/copilot", post(post_copilot))
        .route("/search", post(post_search))
        .route("/sdgs", get(get_sdgs))
        .route("/compose", post(post_compose));
    let mut app = Router::new()
        .nest("/api/v1", api)
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .method_not_allowed_fallback(|| async {
            ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed")
        })
        .with_state(state)
        .layer(middleware::from_fn(log_requests));
    if let Some(origin) = cors_origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        app = app.layer(
            CorsLayer::new()
                .allow_origin(origin)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    app
}

async fn log_requests(req: Request, next: Next) -> Response {
    let (method, path) = (req.method().clone(), req.uri().path().to_string());
    let start = Instant::now();
    let response = next.run(req).await;
    tracing::info!(
        "{method} {path} {} {:.1}ms",
        response.status().as_u16(),
        start.elapsed().as_secs_f64() * 1000.0
    );
    response
}

/// Loads the configured snapshot and serves until `shutdown` resolves.
pub async fn serve(config: ServiceConfig, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServiceError> {
    let path = config.snapshot.as_ref().ok_or(ServiceError::MissingSnapshot)?;
    let catalog = load_snapshot(path)?;
    let mut state = AppState::new(catalog).with_copilot_limits(config.copilot_timeout, config.copilot_concurrency);
    if let Some(url) = &config.copilot_url {
        state = state.with_adapter(Arc::new(HttpAdapter::new(url.clone(), config.copilot_timeout)));
    }
    let app = router(Arc::new(state), config.cors_origin.as_deref());
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| ServiceError::Bind { addr, source })?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentParams {
    view: Option<String>,
}

async fn get_document(
    State(st): Shared,
    Path(id): Path<String>,
    params: Result<Query<DocumentParams>, QueryRejection>,
) -> Result<Json<CatalogDocument>, ApiError> {
    let Query(params) = params.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_query", e.body_text()))?;
    let view = st.view();
    let doc = view.catalog.get(&id).ok_or_else(|| ApiError::not_found(format!("no document {id}")))?;
    match params.view.as_deref() {
        None | Some("full") => Ok(Json(doc.clone())),
        Some("summary") => Ok(Json(doc.summary())),
        Some(other) => Err(ApiError::new(StatusCode::BAD_REQUEST, "bad_query", format!("unknown view {other:?}"))),
    }
}

async fn post_search(State(st): Shared, JsonBody(q): JsonBody<SearchQuery>) -> Result<Response, ApiError> {
    let results = st.view().catalog.search(&q)?;
    Ok(Json(results).into_response())
}

#[derive(Serialize)]
struct SdgSummary<'a> {
    goal: u8,
    title: &'a str,
    document_count: usize,
}

async fn get_sdgs(State(st): Shared) -> Response {
    let view = st.view();
    let counts = view.catalog.sdg_counts();
    let body: Vec<SdgSummary> = st
        .lexicon
        .goals()
        .map(|(goal, entry)| SdgSummary { goal, title: &entry.title, document_count: counts.get(&goal).copied().unwrap_or(0) })
        .collect();
    Json(body).into_response()
}

/// A loop with its id and the links it runs through.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisLoop {
    pub id: String,
    #[serde(rename = "type")]
    pub loop_type: LoopType,
    pub variables: Vec<String>,
    pub links: Vec<DiagramLink>,
}

fn analysis_loops(loops: &[FeedbackLoop]) -> Vec<AnalysisLoop> {
    loop_ids(loops)
        .into_iter()
        .zip(loops)
        .map(|(id, l)| AnalysisLoop {
            id,
            loop_type: l.loop_type,
            variables: l.cycle.clone(),
            links: l
                .links
                .iter()
                .map(|k| DiagramLink { from: k.from.clone(), to: k.to.clone(), polarity: k.polarity })
                .collect(),
        })
        .collect()
}

#[derive(Serialize)]
struct AnalysisBody {
    diagram: StructuredDiagram,
    loops: Vec<AnalysisLoop>,
    layout: LayoutResult,
}

struct Analyzed {
    graph: CausalGraph,
    loops: Vec<FeedbackLoop>,
    hints: Vec<ViewHint>,
}

fn failed(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "analysis_failed", e.to_string())
}

fn analyze(doc: &CatalogDocument) -> Result<Analyzed, ApiError> {
    let (graph, hints) = if let Some(model) = &doc.model {
        (derive_causal_graph(model).map_err(failed)?, model.views.clone())
    } else if let Some(diagram) = &doc.diagram {
        (from_structured(diagram).map_err(failed)?.graph, Vec::new())
    } else {
        return Err(ApiError::new(StatusCode::CONFLICT, "no_model", format!("document {} has no model or diagram", doc.id)));
    };
    let loops = enumerate_loops(&graph, None).map_err(failed)?.loops;
    Ok(Analyzed { graph, loops, hints })
}

fn json_bytes(body: &impl Serialize) -> Result<Bytes, ApiError> {
    serde_json::to_vec(body).map(Bytes::from).map_err(|_| ApiError::internal())
}

fn json_response(bytes: Bytes) -> Response {
    ([(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], bytes).into_response()
}

async fn get_analysis(State(st): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let view = st.view();
    if let Some(bytes) = view.analysis.lock().unwrap_or_else(|p| p.into_inner()).get(&id) {
        return Ok(json_response(bytes.clone()));
    }
    let doc = view.catalog.get(&id).ok_or_else(|| ApiError::not_found(format!("no document {id}")))?;
    let a = analyze(doc)?;
    let body = AnalysisBody {
        diagram: to_structured(&a.graph, &a.loops).map_err(failed)?,
        loops: analysis_loops(&a.loops),
        layout: layout_with_hints(&a.graph, fnv1a64(id.as_bytes()), &a.hints),
    };
    let bytes = json_bytes(&body)?;
    view.analysis.lock().unwrap_or_else(|p| p.into_inner()).insert(id, bytes.clone());
    Ok(json_response(bytes))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CopilotBody {
    question: String,
}

async fn post_copilot(
    State(st): Shared,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<CopilotBody>,
) -> Result<Response, ApiError> {
    let view = st.view();
    let doc = view.catalog.get(&id).ok_or_else(|| ApiError::not_found(format!("no document {id}")))?;
    if body.question.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty_question", "question is empty"));
    }
    let Analyzed { graph, loops, .. } = analyze(doc)?;

    let deadline = Instant::now() + st.copilot_timeout;
    let timed_out = || ApiError::new(StatusCode::GATEWAY_TIMEOUT, "adapter_timeout", "co-pilot adapter timed out");
    let permit = tokio::time::timeout_at(deadline.into(), st.permits.clone().acquire_owned())
        .await
        .map_err(|_| timed_out())?
        .map_err(|_| ApiError::internal())?;
    let adapter = st.adapter.clone();
    let task = tokio::task::spawn_blocking(move || {
        let _permit = permit;
        copilot_respond(&body.question, &graph, &loops, adapter.as_ref())
    });
    let reply = tokio::time::timeout_at(deadline.into(), task)
        .await
        .map_err(|_| timed_out())?
        .map_err(|_| ApiError::internal())??;
    Ok(Json(reply).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposeBody {
    text: Option<String>,
    edits: Option<Vec<ModelEdit>>,
    base: Option<StructuredDiagram>,
}

#[derive(Serialize)]
struct NarrativeBody {
    overview: String,
    links: Vec<String>,
    loops: Vec<String>,
    text: String,
}

#[derive(Serialize)]
struct ComposeResponse {
    diagram: StructuredDiagram,
    loops: Vec<AnalysisLoop>,
    layout: LayoutResult,
    narrative: NarrativeBody,
    unparsed: Vec<UnparsedSentence>,
    warnings: Vec<NarrativeWarning>,
}

async fn post_compose(JsonBody(body): JsonBody<ComposeBody>) -> Result<Response, ApiError> {
    let (edits, unparsed) = match (body.text, body.edits) {
        (Some(text), None) => {
            let parsed = parse_controlled_nl(&text)?;
            (parsed.edits, parsed.unparsed)
        }
        (None, Some(edits)) => (edits, Vec::new()),
        (Some(_), Some(_)) => return Err(ApiError::malformed("give either text or edits, not both")),
        (None, None) => return Err(ApiError::malformed("give text or edits")),
    };
    let (base, warnings) = match &body.base {
        Some(d) => {
            let import = from_structured(d)?;
            (import.graph, import.warnings)
        }
        None => (CausalGraph::empty(), Vec::new()),
    };
    let graph = apply_edits(&base, &edits)?;
    let loops = enumerate_loops(&graph, None).map_err(failed)?.loops;
    let diagram = to_structured(&graph, &loops)?;
    let seed = fnv1a64(&json_bytes(&diagram)?);
    let doc = describe(&graph, &loops);
    let response = ComposeResponse {
        layout: layout_with_hints(&graph, seed, &[]),
        loops: analysis_loops(&loops),
        narrative: NarrativeBody { text: doc.render(), overview: doc.overview, links: doc.links, loops: doc.loops },
        diagram,
        unparsed,
        warnings,
    };
    Ok(json_response(json_bytes(&response)?))
}
