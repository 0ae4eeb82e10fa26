//! HTTP review loop: flag likely negative-stance messages, collect human
//! verdicts and retrain on them.
//!
//! Endpoints live under `/api`; any other path is served from the optional
//! static directory.

mod error;
mod routes;
mod state;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;

pub use error::{ApiError, LineError};
pub use routes::{router, ClassScore, IngestResponse, PredictResponse, RejectedLine, RetrainResponse, StatsResponse};
pub use state::{ActiveModel, AppState, RetrainGuard, ServiceConfig, StartupError, MODEL_FILE};

/// Bind `addr` and serve until the process is stopped.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
