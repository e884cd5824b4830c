//! HTTP service answering bean recommendation queries.
//!
//! Endpoints: `GET /health`, `GET /metadata`, `GET /beans/{id}` and
//! `POST /recommend`. Request and response bodies are the types in
//! [`beanrec_core::api`].

mod config;
mod error;
mod routes;
mod state;

use std::future::Future;
use std::net::SocketAddr;

pub use config::ServiceConfig;
pub use error::{ApiError, ServiceError};
pub use routes::router;
pub use state::{load_space, AppState, LoadedSpace};

/// Binds `addr` and serves until `shutdown` resolves. Sends the bound address
/// (useful with port 0) through `bound` once listening.
pub async fn serve(
    state: AppState,
    addr: SocketAddr,
    dev_cors: bool,
    bound: Option<tokio::sync::oneshot::Sender<SocketAddr>>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tracing::info!(%local, "listening");
    if let Some(tx) = bound {
        let _ = tx.send(local);
    }
    axum::serve(listener, router(state, dev_cors))
        .with_graceful_shutdown(shutdown)
        .await
}
