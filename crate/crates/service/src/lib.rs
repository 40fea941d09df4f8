//! The DRH service: fingerprint encoding, index build/query and the
//! simulation experiments over HTTP/JSON.
//!
//! The router is plain axum state + handlers, so it can be served on a
//! socket (`drh serve`) or driven in-process through tower by the CLI and
//! tests. All handlers push real work onto blocking threads; results are
//! deterministic functions of the request, whatever the transport.
//!
//! Routes:
//!
//! | method | path                        | body / response                |
//! |--------|-----------------------------|--------------------------------|
//! | GET    | `/healthz`                  | `{"status":"ok"}`              |
//! | POST   | `/v1/dist`                  | JSON in, JSON out              |
//! | POST   | `/v1/encode`                | JSON in, JSON out              |
//! | POST   | `/v1/index/build`           | JSON in, JSON out              |
//! | POST   | `/v1/index/query`           | JSON in, JSON out              |
//! | GET    | `/v1/index/meta?path=`      | JSON out                       |
//! | POST   | `/v1/simulate/rate-distortion` | JSON in, `text/csv` out     |
//! | POST   | `/v1/simulate/hamming`      | JSON in, `text/csv` out        |
//! | POST   | `/v1/simulate/drh-histogram`| JSON in, `text/csv` out        |
//! | POST   | `/v1/simulate/recall`       | JSON in, `text/csv` out        |

mod error;
mod routes;
mod state;

pub use error::ApiError;
pub use state::AppState;

use axum::routing::{get, post};
use axum::Router;
use std::sync::Arc;

pub fn router() -> Router {
    router_with_state(Arc::new(AppState::default()))
}

/// Serves the default router on an already-bound listener.
pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

pub fn router_with_state(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(routes::health))
        .route("/v1/dist", post(routes::dist))
        .route("/v1/encode", post(routes::encode))
        .route("/v1/index/build", post(routes::build))
        .route("/v1/index/query", post(routes::query))
        .route("/v1/index/meta", get(routes::index_meta))
        .route("/v1/simulate/rate-distortion", post(routes::simulate_curve))
        .route("/v1/simulate/hamming", post(routes::simulate_hamming))
        .route(
            "/v1/simulate/drh-histogram",
            post(routes::simulate_histogram),
        )
        .route("/v1/simulate/recall", post(routes::simulate_recall))
        .with_state(state)
}
