//! Read-only HTTP/JSON API over a workspace.
//!
//! Every heavy artifact is fetched through [`Workspace::get_or_compute`], so a
//! workspace that was fully materialized beforehand is served from cache.
//! Bodies are serialized from structs with a fixed field order, so identical
//! requests produce identical bytes.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use ganseval_core::metrics::{quantile_sorted, DEFAULT_BINS};
use ganseval_core::workspace::{Colorfield, Detail};
use ganseval_core::{
    diff_to_median, percentile_membership, Artifact, ArtifactKey, Band, DataSource,
    DistanceMetric, Error, RealStats, TimeHistogram, ViewKind, Workspace,
};
use serde::Serialize;
use tower_http::cors::{Any, CorsLayer};

pub const JSON_CONTENT_TYPE: &str = "application/json; charset=utf-8";
/// Upper bound on the `bins` query parameter.
pub const MAX_BINS: usize = 1000;

/// Error envelope used by every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotFound(m) => ApiError::not_found(m),
            Error::InvalidInput(m) => ApiError::bad_request("invalid_input", m),
            Error::DegenerateData(m) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "degenerate_data", m)
            }
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string()),
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request("bad_query", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        json_response(status, &self)
    }
}

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    let bytes = serde_json::to_vec(body).expect("response bodies serialize");
    (
        status,
        [(header::CONTENT_TYPE, HeaderValue::from_static(JSON_CONTENT_TYPE))],
        bytes,
    )
        .into_response()
}

fn ok<T: Serialize>(body: &T) -> Response {
    json_response(StatusCode::OK, body)
}

type ApiResult = Result<Response, ApiError>;
type Params = Result<Query<HashMap<String, String>>, QueryRejection>;

#[derive(Clone)]
struct AppState {
    workspace: Arc<Workspace>,
}

impl AppState {
    async fn fetch(&self, key: ArtifactKey) -> Result<Artifact, ApiError> {
        let ws = Arc::clone(&self.workspace);
        let label = key.canonical();
        let fetched = tokio::task::spawn_blocking(move || ws.get_or_compute(&key))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
        if let Some(err) = fetched.storage_error {
            tracing::warn!(artifact = %label, "cache write failed: {err}");
        }
        Ok(fetched.artifact)
    }

    async fn stats(&self) -> Result<RealStats, ApiError> {
        Ok(self
            .fetch(ArtifactKey::RealStats)
            .await?
            .into_real_stats()
            .expect("stats key yields stats"))
    }

    async fn detail(&self, source: DataSource, bins: usize) -> Result<Detail, ApiError> {
        Ok(self
            .fetch(ArtifactKey::Detail { source, bins })
            .await?
            .into_detail()
            .expect("detail key yields detail"))
    }

    async fn order(&self, source: DataSource) -> Result<Vec<usize>, ApiError> {
        Ok(self
            .fetch(ArtifactKey::Order { source })
            .await?
            .into_order()
            .expect("order key yields order"))
    }
}

/// Builds the API router. CORS allows any origin for GET requests.
pub fn router(workspace: Arc<Workspace>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET])
        .allow_headers(Any);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/runs", get(runs))
        .route("/api/real/stats", get(real_stats))
        .route("/api/real/detail", get(real_detail))
        .route("/api/runs/{run}/iteration-view", get(iteration_view))
        .route("/api/runs/{run}/iterations/{iteration}/detail", get(iteration_detail))
        .route("/api/series/{selector}", get(series))
        .fallback(fallback)
        .with_state(AppState { workspace })
        .layer(cors)
}

/// Binds `addr` and serves until the process is interrupted.
pub async fn serve(workspace: Arc<Workspace>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(workspace))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn fallback(method: Method, uri: axum::http::Uri) -> ApiError {
    ApiError::not_found(format!("no route for {method} {}", uri.path()))
}

async fn health() -> Response {
    #[derive(Serialize)]
    struct Health {
        status: &'static str,
    }
    ok(&Health { status: "ok" })
}

#[derive(Serialize)]
struct RunSummary<'a> {
    name: &'a str,
    iterations: Vec<u64>,
    samples: Vec<usize>,
}

#[derive(Serialize)]
struct RunsBody<'a> {
    real: RealSummary,
    runs: Vec<RunSummary<'a>>,
}

#[derive(Serialize)]
struct RealSummary {
    series: usize,
    length: usize,
}

async fn runs(State(state): State<AppState>) -> Response {
    let ws = &state.workspace;
    ok(&RunsBody {
        real: RealSummary {
            series: ws.real().len(),
            length: ws.real().series_len(),
        },
        runs: ws
            .runs()
            .map(|r| RunSummary {
                name: r.name(),
                iterations: r.iterations().collect(),
                samples: r.snapshots().iter().map(|s| s.series.rows()).collect(),
            })
            .collect(),
    })
}

async fn real_stats(State(state): State<AppState>) -> ApiResult {
    Ok(ok(&state.stats().await?))
}

fn parse_bins(params: &HashMap<String, String>) -> Result<usize, ApiError> {
    match params.get("bins") {
        None => Ok(DEFAULT_BINS),
        Some(s) => match s.parse::<usize>() {
            Ok(b) if (2..=MAX_BINS).contains(&b) => Ok(b),
            _ => Err(ApiError::bad_request(
                "bad_bins",
                format!("bins must be an integer in 2..={MAX_BINS}, got '{s}'"),
            )),
        },
    }
}

#[derive(Serialize)]
struct DetailBody<'a> {
    source: &'static str,
    run: Option<&'a str>,
    iteration: Option<u64>,
    bins: usize,
    colorfield: Colorfield,
    time_histogram: TimeHistogram,
    value_range: (f64, f64),
}

impl<'a> DetailBody<'a> {
    fn new(run: Option<(&'a str, u64)>, bins: usize, d: Detail) -> Self {
        Self {
            source: if run.is_some() { "generated" } else { "real" },
            run: run.map(|r| r.0),
            iteration: run.map(|r| r.1),
            bins,
            colorfield: d.colorfield,
            time_histogram: d.time_histogram,
            value_range: d.value_range,
        }
    }
}

async fn real_detail(State(state): State<AppState>, params: Params) -> ApiResult {
    let Query(params) = params?;
    let bins = parse_bins(&params)?;
    let d = state.detail(DataSource::Real, bins).await?;
    Ok(ok(&DetailBody::new(None, bins, d)))
}

async fn iteration_detail(
    State(state): State<AppState>,
    Path((run, iteration)): Path<(String, String)>,
    params: Params,
) -> ApiResult {
    let Query(params) = params?;
    let bins = parse_bins(&params)?;
    let iteration: u64 = iteration
        .parse()
        .map_err(|_| ApiError::bad_request("bad_iteration", format!("'{iteration}' is not an iteration number")))?;
    let r = state
        .workspace
        .run(&run)
        .ok_or_else(|| ApiError::not_found(format!("run '{run}'")))?;
    if r.snapshot(iteration).is_none() {
        return Err(ApiError::not_found(format!("iteration {iteration} of run '{run}'")));
    }
    let d = state
        .detail(
            DataSource::Iteration {
                run: run.clone(),
                iteration,
            },
            bins,
        )
        .await?;
    Ok(ok(&DetailBody::new(Some((&run, iteration)), bins, d)))
}

/// Color normalization bound selection for iteration views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Clip {
    None,
    P99,
}

#[derive(Serialize)]
struct IterationViewBody<'a> {
    run: &'a str,
    metric: DistanceMetric,
    kind: ViewKind,
    iterations: Vec<u64>,
    rows: Vec<usize>,
    cells: Vec<Vec<f64>>,
    row_order: Vec<Vec<usize>>,
    min: f64,
    max: f64,
    clip: Clip,
}

fn required<T: std::str::FromStr>(
    params: &HashMap<String, String>,
    name: &str,
    code: &'static str,
) -> Result<T, ApiError> {
    let raw = params
        .get(name)
        .ok_or_else(|| ApiError::bad_request(code, format!("missing query parameter '{name}'")))?;
    raw.parse()
        .map_err(|_| ApiError::bad_request(code, format!("invalid {name} '{raw}'")))
}

async fn iteration_view(
    State(state): State<AppState>,
    Path(run): Path<String>,
    params: Params,
) -> ApiResult {
    let Query(params) = params?;
    if state.workspace.run(&run).is_none() {
        return Err(ApiError::not_found(format!("run '{run}'")));
    }
    let metric: DistanceMetric = required(&params, "metric", "bad_metric")?;
    let kind: ViewKind = required(&params, "kind", "bad_kind")?;
    let clip = match params.get("clip").map(String::as_str) {
        None | Some("none") => Clip::None,
        Some("p99") => Clip::P99,
        Some(other) => {
            return Err(ApiError::bad_request(
                "bad_clip",
                format!("clip must be 'none' or 'p99', got '{other}'"),
            ))
        }
    };
    let view = state
        .fetch(ArtifactKey::IterationView {
            run: run.clone(),
            metric,
            kind,
        })
        .await?
        .into_iteration_view()
        .expect("iteration-view key yields a view");

    let (min, mut max) = view.extrema();
    if clip == Clip::P99 {
        let mut all: Vec<f64> = view.cells.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        max = quantile_sorted(&all, 0.99);
    }
    Ok(ok(&IterationViewBody {
        run: &run,
        metric,
        kind,
        iterations: view.iterations,
        rows: view.rows,
        cells: view.cells,
        row_order: view.row_order,
        min,
        max,
        clip,
    }))
}

/// A parsed `r_<id>` or `g_<iter>_<id>` series selector. Ids index the PC1
/// sorted order of their set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Real { id: usize },
    Generated { iteration: u64, id: usize },
}

impl Selector {
    pub fn parse(s: &str) -> Option<Self> {
        fn num<T: std::str::FromStr>(s: &str) -> Option<T> {
            if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            s.parse().ok()
        }
        let mut parts = s.split('_');
        match (parts.next()?, parts.next(), parts.next(), parts.next()) {
            ("r", Some(id), None, None) => Some(Selector::Real { id: num(id)? }),
            ("g", Some(it), Some(id), None) => Some(Selector::Generated {
                iteration: num(it)?,
                id: num(id)?,
            }),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Selector::Real { id } => format!("r_{id}"),
            Selector::Generated { iteration, id } => format!("g_{iteration}_{id}"),
        }
    }
}

#[derive(Serialize)]
struct SeriesBody {
    label: String,
    source: &'static str,
    run: Option<String>,
    iteration: Option<u64>,
    id: usize,
    original_index: usize,
    values: Vec<f64>,
    diff_to_median: Vec<f64>,
    percentile_membership: Option<Band>,
}

async fn series(
    State(state): State<AppState>,
    Path(selector): Path<String>,
    params: Params,
) -> ApiResult {
    let Query(params) = params?;
    let sel = Selector::parse(&selector).ok_or_else(|| {
        ApiError::bad_request(
            "bad_selector",
            format!("'{selector}' is not of the form r_<id> or g_<iteration>_<id>"),
        )
    })?;
    let ws = &state.workspace;
    let (source, set, id) = match sel {
        Selector::Real { id } => (DataSource::Real, ws.real().matrix(), id),
        Selector::Generated { iteration, id } => {
            let run = params.get("run").ok_or_else(|| {
                ApiError::bad_request("missing_run", "generated selectors need a 'run' query parameter")
            })?;
            let snap = ws
                .run(run)
                .ok_or_else(|| ApiError::not_found(format!("run '{run}'")))?
                .snapshot(iteration)
                .ok_or_else(|| ApiError::not_found(format!("iteration {iteration} of run '{run}'")))?;
            let source = DataSource::Iteration {
                run: run.clone(),
                iteration,
            };
            (source, &snap.series, id)
        }
    };
    if id >= set.rows() {
        return Err(ApiError::not_found(format!(
            "id {id} out of range, the set has {} series",
            set.rows()
        )));
    }
    let order = state.order(source.clone()).await?;
    let stats = state.stats().await?;
    let original_index = order[id];
    let values = set.row(original_index).to_vec();
    let diff = diff_to_median(&values, &stats)?;
    let membership = percentile_membership(&values, &stats)?;
    let (run, iteration) = match source {
        DataSource::Real => (None, None),
        DataSource::Iteration { run, iteration } => (Some(run), Some(iteration)),
    };
    Ok(ok(&SeriesBody {
        label: sel.label(),
        source: if run.is_some() { "generated" } else { "real" },
        run,
        iteration,
        id,
        original_index,
        values,
        diff_to_median: diff,
        percentile_membership: membership,
    }))
}
