//! Thin client for the DRH service.
//!
//! Two transports behind one API: `DrhClient::http` talks to a remote
//! server over HTTP/1, and `DrhClient::local` drives an in-process router
//! directly through the tower service interface — same routes, same JSON,
//! no socket — which is how the CLI runs when no server is configured.

pub mod api;

use api::*;
use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use http_body_util::BodyExt;
use hyper_util::client::legacy::connect::HttpConnector;
use hyper_util::client::legacy::Client as HyperClient;
use hyper_util::rt::TokioExecutor;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;
use tower::ServiceExt;

#[derive(Error, Debug)]
pub enum ClientError {
    /// The service answered with a non-success status.
    #[error("{kind}: {message}")]
    Api {
        status: u16,
        kind: String,
        message: String,
        position: Option<u64>,
    },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("invalid response: {0}")]
    Decode(String),
    #[error("invalid server url: {0}")]
    InvalidUrl(String),
}

pub type Result<T, E = ClientError> = std::result::Result<T, E>;

enum Transport {
    Local(axum::Router),
    Http {
        base: String,
        client: HyperClient<HttpConnector, Body>,
    },
}

pub struct DrhClient {
    transport: Transport,
}

impl DrhClient {
    /// Client over an in-process router; requests never leave the process.
    pub fn local(router: axum::Router) -> DrhClient {
        DrhClient {
            transport: Transport::Local(router),
        }
    }

    /// Client for a remote server, e.g. `http://127.0.0.1:7878`.
    pub fn http(base_url: &str) -> Result<DrhClient> {
        if !base_url.starts_with("http://") && !base_url.starts_with("https://") {
            return Err(ClientError::InvalidUrl(base_url.into()));
        }
        if base_url.starts_with("https://") {
            return Err(ClientError::InvalidUrl(
                "only plain http is supported".into(),
            ));
        }
        Ok(DrhClient {
            transport: Transport::Http {
                base: base_url.trim_end_matches('/').to_string(),
                client: HyperClient::builder(TokioExecutor::new()).build_http(),
            },
        })
    }

    async fn raw(
        &self,
        method: Method,
        path: &str,
        body: Option<Vec<u8>>,
    ) -> Result<(StatusCode, Vec<u8>)> {
        let response = match &self.transport {
            Transport::Local(router) => {
                let mut builder = Request::builder().method(method).uri(path);
                if body.is_some() {
                    builder = builder.header(header::CONTENT_TYPE, "application/json");
                }
                let request = builder
                    .body(Body::from(body.unwrap_or_default()))
                    .map_err(|e| ClientError::Transport(e.to_string()))?;
                router
                    .clone()
                    .oneshot(request)
                    .await
                    .map_err(|e| ClientError::Transport(e.to_string()))?
            }
            Transport::Http { base, client } => {
                let mut builder = Request::builder()
                    .method(method)
                    .uri(format!("{base}{path}"));
                if body.is_some() {
                    builder = builder.header(header::CONTENT_TYPE, "application/json");
                }
                let request = builder
                    .body(Body::from(body.unwrap_or_default()))
                    .map_err(|e| ClientError::Transport(e.to_string()))?;
                client
                    .request(request)
                    .await
                    .map_err(|e| ClientError::Transport(e.to_string()))?
                    .map(Body::new)
            }
        };
        let status = response.status();
        let bytes = response
            .into_body()
            .collect()
            .await
            .map_err(|e| ClientError::Transport(e.to_string()))?
            .to_bytes();
        Ok((status, bytes.to_vec()))
    }

    fn check_status(status: StatusCode, bytes: &[u8]) -> Result<()> {
        if status.is_success() {
            return Ok(());
        }
        match serde_json::from_slice::<ErrorBody>(bytes) {
            Ok(body) => Err(ClientError::Api {
                status: status.as_u16(),
                kind: body.kind,
                message: body.error,
                position: body.position,
            }),
            Err(_) => Err(ClientError::Api {
                status: status.as_u16(),
                kind: "http".into(),
                message: String::from_utf8_lossy(bytes).into_owned(),
                position: None,
            }),
        }
    }

    async fn post_json<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        request: &Req,
    ) -> Result<Resp> {
        let body = serde_json::to_vec(request).map_err(|e| ClientError::Decode(e.to_string()))?;
        let (status, bytes) = self.raw(Method::POST, path, Some(body)).await?;
        Self::check_status(status, &bytes)?;
        serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode(e.to_string()))
    }

    async fn post_csv<Req: Serialize>(&self, path: &str, request: &Req) -> Result<String> {
        let body = serde_json::to_vec(request).map_err(|e| ClientError::Decode(e.to_string()))?;
        let (status, bytes) = self.raw(Method::POST, path, Some(body)).await?;
        Self::check_status(status, &bytes)?;
        String::from_utf8(bytes).map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub async fn health(&self) -> Result<()> {
        let (status, bytes) = self.raw(Method::GET, "/healthz", None).await?;
        Self::check_status(status, &bytes)
    }

    pub async fn dist(&self, request: &DistRequest) -> Result<DistResponse> {
        self.post_json("/v1/dist", request).await
    }

    pub async fn encode(&self, request: &EncodeRequest) -> Result<EncodeResponse> {
        self.post_json("/v1/encode", request).await
    }

    pub async fn build(&self, request: &BuildRequest) -> Result<BuildResponse> {
        self.post_json("/v1/index/build", request).await
    }

    pub async fn query(&self, request: &QueryRequest) -> Result<QueryResponse> {
        self.post_json("/v1/index/query", request).await
    }

    pub async fn index_meta(&self, path: &str) -> Result<IndexMetaResponse> {
        let encoded: String = path
            .bytes()
            .flat_map(|b| {
                if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~' | b'/') {
                    vec![b as char]
                } else {
                    format!("%{b:02X}").chars().collect()
                }
            })
            .collect();
        let (status, bytes) = self
            .raw(Method::GET, &format!("/v1/index/meta?path={encoded}"), None)
            .await?;
        Self::check_status(status, &bytes)?;
        serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub async fn simulate_curve(&self, request: &CurveRequest) -> Result<String> {
        self.post_csv("/v1/simulate/rate-distortion", request).await
    }

    pub async fn simulate_hamming(&self, request: &HammingRequest) -> Result<String> {
        self.post_csv("/v1/simulate/hamming", request).await
    }

    pub async fn simulate_histogram(&self, request: &HistogramRequest) -> Result<String> {
        self.post_csv("/v1/simulate/drh-histogram", request).await
    }

    pub async fn simulate_recall(&self, request: &RecallRequest) -> Result<String> {
        self.post_csv("/v1/simulate/recall", request).await
    }
}
