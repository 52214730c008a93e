//! HTTP front end for the check pipeline and completed corpus runs.
//!
//! | route | |
//! |---|---|
//! | `POST /v1/check` | run detect, assign, reveal and eliminate on one text |
//! | `GET /v1/taxonomy` | the attribute tree with descriptions |
//! | `GET /v1/reports/{view}?run=&top_k=` | a report over a run directory written by `dare analyze` |
//!
//! Handlers share read-only state only. Submitted texts are never stored or
//! logged.

use std::future::Future;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, Method};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use dare_core::config::Config;
use dare_core::corpus::{read_results, PipelineRun, RESULTS_FILE, SUMMARY_FILE};
use dare_core::report::{Report, ReportView, DEFAULT_TOP_K};
use dare_core::{Dare, LexiconError, LexiconManifest, RephraseStrategy, Taxonomy};

mod error;

pub use error::{ApiError, ErrorCode};

/// Request body of `POST /v1/check`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRequest {
    pub text: String,
    #[serde(default)]
    pub strategy: Option<RephraseStrategy>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("invalid CORS origin `{0}`")]
    CorsOrigin(String),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(#[source] std::io::Error),
}

#[derive(Debug)]
pub struct AppState {
    pub dare: Dare,
    pub taxonomy: Taxonomy,
    pub runs_dir: PathBuf,
    pub max_text_len: usize,
}

impl AppState {
    pub fn new(dare: Dare, runs_dir: impl Into<PathBuf>, max_text_len: usize) -> Self {
        AppState {
            dare,
            taxonomy: Taxonomy::new(),
            runs_dir: runs_dir.into(),
            max_text_len,
        }
    }

    /// Loads and compiles the lexicons named by the config.
    pub fn from_config(config: &Config) -> Result<Self, ServiceError> {
        let matchers = LexiconManifest::load(&config.lexicon_manifest)?.compile()?;
        let dare = Dare::new(matchers, config.filter, config.dare.clone());
        Ok(AppState::new(
            dare,
            &config.service.runs_dir,
            config.service.max_text_len,
        ))
    }

    /// Largest accepted body. A scalar takes at most 12 bytes once JSON-escaped.
    fn body_limit(&self) -> usize {
        self.max_text_len.saturating_mul(12).saturating_add(4096)
    }
}

pub fn router(state: Arc<AppState>, cors_origin: &str) -> Result<Router, ServiceError> {
    let origin = if cors_origin == "*" {
        AllowOrigin::from(Any)
    } else {
        let v = HeaderValue::from_str(cors_origin)
            .map_err(|_| ServiceError::CorsOrigin(cors_origin.to_string()))?;
        AllowOrigin::exact(v)
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Ok(Router::new()
        .route("/v1/check", post(check))
        .route("/v1/taxonomy", get(taxonomy))
        .route("/v1/reports/{view}", get(report))
        .fallback(not_found)
        .layer(cors)
        .with_state(state))
}

async fn check(State(state): State<Arc<AppState>>, body: Body) -> Result<Response, ApiError> {
    let bytes = to_bytes(body, state.body_limit())
        .await
        .map_err(|_| ApiError::too_long(state.max_text_len))?;
    let req: CheckRequest = serde_json::from_slice(&bytes)
        .map_err(|e| ApiError::bad_request("malformed request body").with_detail(e.to_string()))?;
    if req.text.chars().count() > state.max_text_len {
        return Err(ApiError::too_long(state.max_text_len));
    }
    let strategy = req.strategy.unwrap_or(state.dare.config().strategy);
    let state2 = state.clone();
    let out = tokio::task::spawn_blocking(move || state2.dare.process_with(&req.text, strategy))
        .await
        .map_err(|_| ApiError::internal())?
        .map_err(|e| {
            log::error!("check failed: {e}");
            ApiError::internal()
        })?;
    Ok(Json(out).into_response())
}

async fn taxonomy(State(state): State<Arc<AppState>>) -> Json<Taxonomy> {
    Json(state.taxonomy.clone())
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    run: Option<String>,
    top_k: Option<String>,
}

async fn report(
    State(state): State<Arc<AppState>>,
    UrlPath(view): UrlPath<String>,
    Query(q): Query<ReportQuery>,
) -> Result<Response, ApiError> {
    let view: ReportView = view.parse().map_err(ApiError::bad_request)?;
    let top_k = match q.top_k.as_deref() {
        None => DEFAULT_TOP_K,
        Some(s) => match s.parse::<usize>() {
            Ok(k) if k >= 1 => k,
            _ => return Err(ApiError::bad_request("top_k must be a positive integer")),
        },
    };
    let run = q
        .run
        .ok_or_else(|| ApiError::bad_request("missing `run` query parameter"))?;
    let runs_dir = state.runs_dir.clone();
    let report = tokio::task::spawn_blocking(move || build_report(&runs_dir, &run, view, top_k))
        .await
        .map_err(|_| ApiError::internal())??;
    Ok(Json(report).into_response())
}

fn build_report(
    runs_dir: &Path,
    run: &str,
    view: ReportView,
    top_k: usize,
) -> Result<Report, ApiError> {
    let (dir, summary) = find_run(runs_dir, run)
        .ok_or_else(|| ApiError::not_found(format!("unknown run `{run}`")))?;
    if !summary.complete {
        return Err(ApiError::not_found(format!("run `{run}` did not complete")));
    }
    let results = read_results(dir.join(RESULTS_FILE)).map_err(|e| {
        log::error!("cannot read results of {run}: {e}");
        ApiError::internal()
    })?;
    Report::build(
        view,
        &results,
        top_k,
        Some(summary.counters.projects_seen as usize),
    )
    .map_err(|e| ApiError::bad_request(e.to_string()))
}

/// A run is `runs_dir/<name>/` where `<name>` is the directory name or the
/// `run_id` recorded in its summary.
pub fn find_run(runs_dir: &Path, run: &str) -> Option<(PathBuf, PipelineRun)> {
    if run.is_empty() || run.contains(['/', '\\']) || run == "." || run == ".." {
        return None;
    }
    let direct = runs_dir.join(run);
    if let Ok(s) = PipelineRun::load(direct.join(SUMMARY_FILE)) {
        return Some((direct, s));
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(runs_dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    dirs.sort();
    dirs.into_iter().find_map(|d| {
        let s = PipelineRun::load(d.join(SUMMARY_FILE)).ok()?;
        (s.run_id == run).then_some((d, s))
    })
}

async fn not_found() -> ApiError {
    ApiError::not_found("no such route")
}

/// Serves `app` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(ServiceError::Serve)
}

/// Binds `addr`, mapping failures to [`ServiceError::Bind`].
pub async fn bind(addr: &str) -> Result<tokio::net::TcpListener, ServiceError> {
    tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: addr.to_string(),
            source,
        })
}

/// Resolves on SIGINT or, on Unix, SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
