//! HTTP API over the verifier, plus hosting of the built front-end.
//!
//! Routes:
//! - `POST /api/verify` takes `{"text": .., "options": {"timeout"?, "provers"?}}`
//!   and answers with the verification report.
//! - `GET /api/libraries` lists the library directory as `{name, source}`.
//! - everything else outside `/api` is served from the static directory,
//!   falling back to its `index.html`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use cnlproof::language::SearchPath;
use cnlproof::provers::{default_provers, ProverConfig};
use cnlproof::stdlib::NAMES;
use cnlproof::verifier::{verify_text, Options};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use tower_http::services::{ServeDir, ServeFile};

pub const DEFAULT_MAX_TEXT: usize = 64 * 1024;

#[derive(Debug, Clone)]
pub struct Config {
    pub lib_dir: PathBuf,
    pub provers: Vec<ProverConfig>,
    /// Verifications running at once; further requests get 503.
    pub max_concurrent: usize,
    /// Built front-end; a placeholder page is served when absent.
    pub static_dir: Option<PathBuf>,
    /// Largest accepted request body, in bytes.
    pub max_text: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { lib_dir: PathBuf::from("lib"), provers: default_provers(), max_concurrent: 4, static_dir: None, max_text: DEFAULT_MAX_TEXT }
    }
}

struct AppState {
    config: Config,
    permits: Arc<Semaphore>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRequest {
    pub text: String,
    #[serde(default)]
    pub options: RequestOptions,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestOptions {
    pub timeout: Option<f64>,
    pub provers: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Library {
    pub name: String,
    pub source: String,
}

pub fn app(config: Config) -> Router {
    let state = Arc::new(AppState { permits: Arc::new(Semaphore::new(config.max_concurrent.max(1))), config });
    let api = Router::new()
        .route("/api/verify", post(verify))
        .route("/api/libraries", get(libraries))
        .route("/api", any(not_found))
        .route("/api/{*rest}", any(not_found));
    let router = match &state.config.static_dir {
        Some(dir) => {
            let index = ServeFile::new(dir.join("index.html"));
            api.fallback_service(ServeDir::new(dir).fallback(index))
        }
        None => api.fallback(get(placeholder)),
    };
    router.with_state(state)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn not_found() -> Response {
    error(StatusCode::NOT_FOUND, "no such endpoint")
}

async fn placeholder() -> Html<&'static str> {
    Html(concat!(
        "<!doctype html><html><head><meta charset=\"utf-8\"><title>cnlproof</title></head>",
        "<body><p>The front-end is not built. POST a proof text to <code>/api/verify</code>.</p></body></html>"
    ))
}

async fn verify(State(state): State<Arc<AppState>>, body: Body) -> Response {
    let limit = state.config.max_text;
    let Ok(bytes) = to_bytes(body, limit).await else {
        return error(StatusCode::BAD_REQUEST, format!("request larger than {limit} bytes"));
    };
    let request: VerifyRequest = match serde_json::from_slice(&bytes) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let options = match options(&state.config, &request.options) {
        Ok(o) => o,
        Err(e) => return error(StatusCode::BAD_REQUEST, e),
    };
    let Ok(permit) = state.permits.clone().try_acquire_owned() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "verifier at capacity, retry later");
    };
    let report = tokio::task::spawn_blocking(move || {
        let _permit = permit;
        verify_text(&request.text, &options)
    })
    .await;
    match report {
        Ok(report) => ([(header::CONTENT_TYPE, "application/json")], report.to_json()).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

fn options(config: &Config, request: &RequestOptions) -> Result<Options, String> {
    let mut provers = config.provers.clone();
    if let Some(names) = &request.provers {
        provers = names
            .iter()
            .map(|n| config.provers.iter().find(|p| p.name == *n).cloned().ok_or_else(|| format!("unknown prover `{n}`")))
            .collect::<Result<_, _>>()?;
        if provers.is_empty() {
            return Err("no provers selected".into());
        }
    }
    if let Some(t) = request.timeout {
        let longest = config.provers.iter().map(|p| p.timeout).fold(0.0, f64::max);
        if !t.is_finite() || t <= 0.0 || t > longest {
            return Err(format!("timeout must be positive and at most {longest} seconds"));
        }
    }
    Ok(Options { search: SearchPath::new(vec![config.lib_dir.clone()]), provers, timeout: request.timeout, ..Options::default() })
}

async fn libraries(State(state): State<Arc<AppState>>) -> Json<Vec<Library>> {
    Json(list_libraries(&state.config.lib_dir))
}

/// `.elfe` files of `dir`: bundled names in dependency order, then the
/// rest alphabetically.
pub fn list_libraries(dir: &Path) -> Vec<Library> {
    let mut libs: Vec<Library> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .filter_map(|entry| {
            let path = entry.path();
            let name = path.file_stem()?.to_str()?.to_string();
            if path.extension()? != "elfe" {
                return None;
            }
            Some(Library { name, source: std::fs::read_to_string(&path).ok()? })
        })
        .collect();
    libs.sort_by_key(|l| (NAMES.iter().position(|n| *n == l.name).unwrap_or(NAMES.len()), l.name.clone()));
    libs
}
