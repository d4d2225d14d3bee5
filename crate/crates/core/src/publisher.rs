//! Static HTTP server for an exported site.
//!
//! Files are served straight from disk (byte ranges included, so AV
//! players can seek). Only `GET` and `HEAD` are accepted; `OPTIONS` is
//! answered as a CORS preflight when enabled. Every successful response
//! carries `Access-Control-Allow-Origin`.

use std::net::{SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Instant;

use axum::body::Body;
use axum::extract::{Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::Router;
use thiserror::Error;
use tokio::sync::oneshot;
use tower_http::services::ServeDir;

pub const DEFAULT_BIND: &str = "127.0.0.1:5501";
pub const IIIF_JSON_TYPE: &str = "application/ld+json;profile=\"http://iiif.io/api/presentation/3/context.json\"";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub root_dir: PathBuf,
    pub bind_address: String,
    pub cors_allow_origin: String,
    /// Served under `/media/` instead of `{root_dir}/media`.
    pub media_dir: Option<PathBuf>,
    /// Answer `OPTIONS` with a 204 preflight instead of 405.
    pub preflight: bool,
}

impl ServerConfig {
    pub fn new(root_dir: impl Into<PathBuf>) -> Self {
        Self {
            root_dir: root_dir.into(),
            bind_address: DEFAULT_BIND.to_string(),
            cors_allow_origin: "*".to_string(),
            media_dir: None,
            preflight: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum PublishError {
    #[error("cannot bind {address}: {source}")]
    BindFailure { address: String, source: std::io::Error },
    #[error("{0} is not an exported site (needs collection/ and manifest/)")]
    RootMissing(PathBuf),
    #[error("media directory {0} does not exist")]
    MediaMissing(PathBuf),
    #[error("bad CORS origin {0:?}")]
    BadOrigin(String),
    #[error("cannot start server runtime: {0}")]
    Runtime(std::io::Error),
}

/// A running server. Dropping it (or calling [`ServerHandle::shutdown`])
/// stops accepting connections, lets in-flight requests finish, and joins
/// the server thread.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(mut self) {
        self.stop_and_join();
    }

    fn stop_and_join(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_and_join();
    }
}

pub fn content_type_for(path: &str) -> &'static str {
    let ext = Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "json" => IIIF_JSON_TYPE,
        "xml" => "application/xml",
        "jpg" | "jpeg" => "image/jpeg",
        "png" => "image/png",
        "tif" | "tiff" => "image/tiff",
        "mp4" => "video/mp4",
        "webm" => "video/webm",
        "mp3" => "audio/mpeg",
        "wav" => "audio/wav",
        "ogg" => "audio/ogg",
        _ => "application/octet-stream",
    }
}

struct Policy {
    origin: HeaderValue,
    preflight: bool,
}

/// Binds synchronously, so an occupied port is reported here rather than
/// from the server thread.
pub fn serve(config: ServerConfig) -> Result<ServerHandle, PublishError> {
    let root = &config.root_dir;
    if !(root.join("collection").is_dir() && root.join("manifest").is_dir()) {
        return Err(PublishError::RootMissing(root.clone()));
    }
    if let Some(media) = &config.media_dir {
        if !media.is_dir() {
            return Err(PublishError::MediaMissing(media.clone()));
        }
    }
    let policy = Arc::new(Policy {
        origin: HeaderValue::from_str(&config.cors_allow_origin)
            .map_err(|_| PublishError::BadOrigin(config.cors_allow_origin.clone()))?,
        preflight: config.preflight,
    });

    let bind_failure = |source| PublishError::BindFailure {
        address: config.bind_address.clone(),
        source,
    };
    let listener = TcpListener::bind(&config.bind_address).map_err(bind_failure)?;
    listener.set_nonblocking(true).map_err(bind_failure)?;
    let addr = listener.local_addr().map_err(bind_failure)?;

    let mut router = Router::new();
    if let Some(media) = &config.media_dir {
        router = router.nest_service("/media", ServeDir::new(media));
    }
    let app = router
        .fallback_service(ServeDir::new(root))
        .layer(middleware::from_fn_with_state(policy, apply_policy));

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(PublishError::Runtime)?;
    let (stop, stopped) = oneshot::channel::<()>();
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let listener = match tokio::net::TcpListener::from_std(listener) {
                Ok(l) => l,
                Err(e) => {
                    log::error!("listener setup failed: {e}");
                    return;
                }
            };
            let shutdown = async {
                let _ = stopped.await;
            };
            if let Err(e) = axum::serve(listener, app).with_graceful_shutdown(shutdown).await {
                log::error!("server stopped: {e}");
            }
        });
    });
    log::info!("serving {} on http://{addr}", root.display());
    Ok(ServerHandle {
        addr,
        stop: Some(stop),
        thread: Some(thread),
    })
}

async fn apply_policy(State(policy): State<Arc<Policy>>, request: Request, next: Next) -> Response {
    let started = Instant::now();
    let method = request.method().clone();
    let path = request.uri().path().to_string();

    let mut response = if method == Method::GET || method == Method::HEAD {
        next.run(request).await
    } else if method == Method::OPTIONS && policy.preflight {
        let mut r = StatusCode::NO_CONTENT.into_response();
        let h = r.headers_mut();
        h.insert(header::ACCESS_CONTROL_ALLOW_METHODS, HeaderValue::from_static("GET, HEAD, OPTIONS"));
        if let Some(asked) = request.headers().get(header::ACCESS_CONTROL_REQUEST_HEADERS) {
            h.insert(header::ACCESS_CONTROL_ALLOW_HEADERS, asked.clone());
        }
        h.insert(header::ACCESS_CONTROL_MAX_AGE, HeaderValue::from_static("86400"));
        r
    } else {
        let mut r = Response::new(Body::empty());
        *r.status_mut() = StatusCode::METHOD_NOT_ALLOWED;
        r.headers_mut().insert(header::ALLOW, HeaderValue::from_static("GET, HEAD"));
        r
    };

    let status = response.status();
    if status.is_success() {
        let h = response.headers_mut();
        h.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, policy.origin.clone());
        if status != StatusCode::NO_CONTENT {
            h.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type_for(&path)));
        }
    }
    log::info!(
        "{method} {path} {} {}ms",
        status.as_u16(),
        started.elapsed().as_millis()
    );
    response
}
