//! HTTP service for navigating the Pareto front: sessions accumulate lower
//! and upper shells across requests and reuse them to tighten bounds.

pub mod app;
pub mod error;
pub mod session;
pub mod store;

pub use app::{router, AppState, InstanceInfo, Job, JobStatus, JobTicket, ServerConfig, SessionInfo};
pub use error::{ApiError, ErrorBody};
pub use session::{navigate, Caps, FrontView, NavigationRecord, Overrides, RunSettings, Session};

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: &str, config: ServerConfig) -> std::io::Result<()> {
    let app = AppState::open(config).await.map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app)).await
}
