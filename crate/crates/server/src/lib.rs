//! Local HTTP JSON API over the chart toolkit.
//!
//! Design, TARL and table endpoints are stateless. Chart runs live in a
//! [`JsonStore`]; writes to one chart are serialized by the store.

mod error;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, PoisonError};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use rzchart::design::{design_chart, ChartConfig, DesignRequest, Side};
use rzchart::monitor::{chart_status, create_chart, ingest_inspection, now_utc, reset_chart};
use rzchart::monitor::{ChartState, ChartSummary, InspectionInput, InspectionRecord};
use rzchart::run_length::{tarl1, ShiftScenario};
use rzchart::store::JsonStore;
use rzchart::tables::{gen_limits_table, gen_tarl_table, render_to_string, Format, GridSpec};

pub use error::{ApiError, ErrorCode};

pub const DEFAULT_ADDR: &str = "127.0.0.1:8642";
pub const OPENAPI: &str = include_str!("../openapi.json");

type ApiResult<T> = Result<T, ApiError>;

pub struct AppState {
    store: JsonStore,
    /// Client token → chart id for idempotent creation (in memory only).
    tokens: Mutex<HashMap<String, String>>,
}

impl AppState {
    pub fn new(store: JsonStore) -> Arc<Self> {
        Arc::new(AppState {
            store,
            tokens: Mutex::new(HashMap::new()),
        })
    }
}

pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/charts", post(create).get(list))
        .route("/api/charts/{id}", get(fetch))
        .route("/api/charts/{id}/inspections", post(inspect))
        .route("/api/charts/{id}/reset", post(reset))
        .route("/api/design", post(design))
        .route("/api/tarl", get(tarl_curve))
        .route("/api/tables/{which}", get(tables))
        .route("/api/openapi.json", get(openapi))
        .route("/api/{*rest}", any(unknown_endpoint))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds and serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, store_dir: PathBuf, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let store = JsonStore::open(store_dir).map_err(std::io::Error::other)?;
    let app = router(AppState::new(store), ui_dir);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::invalid(format!("malformed JSON body: {e}")))
}

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(ErrorCode::IoError, format!("worker failed: {e}")))?
}

#[derive(Debug, Deserialize)]
struct CreateBody {
    #[serde(flatten)]
    request: DesignRequest,
    #[serde(default)]
    client_token: Option<String>,
}

async fn create(State(app): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let body: CreateBody = parse_body(&body)?;
    let state = blocking(move || {
        let mut tokens = app.tokens.lock().unwrap_or_else(PoisonError::into_inner);
        if let Some(id) = body.client_token.as_ref().and_then(|t| tokens.get(t)) {
            return Ok(app.store.get(id)?);
        }
        let state = create_chart(design_chart(&body.request)?)?;
        app.store.insert(&state)?;
        if let Some(token) = body.client_token {
            tokens.insert(token, state.id.clone());
        }
        Ok(state)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(state)).into_response())
}

#[derive(Debug, Serialize)]
struct ListingEntry {
    #[serde(flatten)]
    summary: ChartSummary,
    parent_id: Option<String>,
    created_at: String,
    updated_at: String,
}

async fn list(State(app): State<Arc<AppState>>) -> ApiResult<Json<Vec<ListingEntry>>> {
    let states = blocking(move || Ok(app.store.list()?)).await?;
    Ok(Json(
        states
            .into_iter()
            .map(|s| ListingEntry {
                summary: chart_status(&s),
                parent_id: s.parent_id,
                created_at: s.created_at,
                updated_at: s.updated_at,
            })
            .collect(),
    ))
}

async fn fetch(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<ChartState>> {
    Ok(Json(blocking(move || Ok(app.store.get(&id)?)).await?))
}

async fn inspect(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<InspectionRecord>> {
    let mut input: InspectionInput = parse_body(&body)?;
    if input.timestamp.is_none() {
        input.timestamp = Some(now_utc());
    }
    let record = blocking(move || Ok(app.store.update(&id, |s| ingest_inspection(s, &input))?)).await?;
    Ok(Json(record))
}

async fn reset(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let fresh = blocking(move || {
        let fresh = reset_chart(&app.store.get(&id)?);
        app.store.insert(&fresh)?;
        Ok(fresh)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(fresh)).into_response())
}

async fn design(body: Bytes) -> ApiResult<Json<ChartConfig>> {
    let req: DesignRequest = parse_body(&body)?;
    Ok(Json(design_chart(&req)?))
}

type RawQuery = Result<Query<HashMap<String, String>>, QueryRejection>;

struct Params(HashMap<String, String>);

impl Params {
    fn from(query: RawQuery) -> ApiResult<Self> {
        query
            .map(|Query(q)| Params(q))
            .map_err(|e| ApiError::invalid(format!("malformed query: {e}")))
    }

    fn raw(&self, names: &[&str]) -> Option<&str> {
        names.iter().find_map(|n| self.0.get(*n)).map(String::as_str)
    }

    fn get<T: std::str::FromStr>(&self, names: &[&str]) -> ApiResult<Option<T>> {
        self.raw(names)
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| ApiError::invalid(format!("query `{}`: cannot parse `{v}`", names[0])))
            })
            .transpose()
    }

    fn require<T: std::str::FromStr>(&self, names: &[&str]) -> ApiResult<T> {
        self.get(names)?
            .ok_or_else(|| ApiError::invalid(format!("query `{}` is required", names[0])))
    }

    fn list<T: std::str::FromStr>(&self, names: &[&str]) -> ApiResult<Option<Vec<T>>> {
        self.raw(names)
            .map(|v| {
                v.split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| ApiError::invalid(format!("query `{}`: cannot parse `{s}`", names[0])))
                    })
                    .collect()
            })
            .transpose()
    }

    fn design_request(&self) -> ApiResult<DesignRequest> {
        let side: String = self.require(&["side"])?;
        Ok(DesignRequest {
            side: side.parse::<Side>()?,
            n: self.require(&["n"])?,
            gamma_x: self.require(&["gamma_x"])?,
            gamma_y: self.require(&["gamma_y"])?,
            z0: self.get(&["z0"])?.unwrap_or(1.0),
            rho0: self.require(&["rho0"])?,
            horizon_inspections: self.require(&["I", "horizon_inspections"])?,
            tarl0_target: self.get(&["tarl0_target"])?,
        })
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TarlPoint {
    pub tau: f64,
    pub tarl1: f64,
}

async fn tarl_curve(query: RawQuery) -> ApiResult<Json<Vec<TarlPoint>>> {
    let params = Params::from(query)?;
    let req = params.design_request()?;
    let mut taus: Vec<f64> = params.list(&["taus", "tau"])?.unwrap_or_default();
    if taus.is_empty() {
        return Err(ApiError::invalid("query `taus` must list at least one τ"));
    }
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let rho1 = params.get(&["rho1"])?.unwrap_or(req.rho0);
    let cfg = design_chart(&req)?;
    let points = taus
        .into_iter()
        .map(|tau| {
            let sc = ShiftScenario::new(tau, rho1)?;
            Ok(TarlPoint {
                tau,
                tarl1: tarl1(&cfg, &sc)?,
            })
        })
        .collect::<rzchart::Result<Vec<_>>>()?;
    Ok(Json(points))
}

async fn tables(Path(which): Path<String>, query: RawQuery) -> ApiResult<Response> {
    let params = Params::from(query)?;
    let mut grid = match which.as_str() {
        "limits" | "tarl" => GridSpec::default(),
        "tarl-shift" => GridSpec::correlation_shift(),
        _ => {
            return Err(ApiError::new(
                ErrorCode::NotFound,
                format!("unknown table `{which}`; expected limits, tarl or tarl-shift"),
            ))
        }
    };
    if let Some(horizons) = params.list(&["I", "horizons"])? {
        grid.horizons = horizons;
    }
    let format: Option<String> = params.get(&["format"])?;
    let csv = match format.as_deref() {
        None | Some("json") => false,
        Some("csv") => true,
        Some(other) => return Err(ApiError::invalid(format!("format `{other}`: expected json or csv"))),
    };
    let response = blocking(move || {
        Ok(if which == "limits" {
            let rows = gen_limits_table(&grid)?;
            if csv {
                csv_response(render_to_string(&rows, Format::Csv)?)
            } else {
                Json(rows).into_response()
            }
        } else {
            let rows = gen_tarl_table(&grid)?;
            if csv {
                csv_response(render_to_string(&rows, Format::Csv)?)
            } else {
                Json(rows).into_response()
            }
        })
    })
    .await?;
    Ok(response)
}

fn csv_response(text: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], text).into_response()
}

async fn openapi() -> Response {
    ([(header::CONTENT_TYPE, "application/json")], OPENAPI).into_response()
}

async fn unknown_endpoint(Path(rest): Path<String>) -> ApiError {
    ApiError::new(ErrorCode::NotFound, format!("no endpoint /api/{rest}"))
}
