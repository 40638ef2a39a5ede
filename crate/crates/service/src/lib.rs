//! HTTP backend for interactive mesh correction.
//!
//! Sessions hold a source image and a working mesh that clients edit one
//! vertex at a time; every accepted edit bumps the session revision.
//! Previews are rendered from the last committed mesh, and exports write the
//! full-resolution correction plus its mesh and flow files. See
//! `PROTOCOL.md` for routes and message formats.

mod api;
mod error;
pub mod render;
pub mod session;

use std::future::Future;
use std::io;
use std::path::Path;
use std::sync::Arc;

pub use api::{router, AppState, MeshJson, ServiceConfig, DEFAULT_PREVIEW_DIM, REVISION_HEADER};
pub use error::ApiError;

/// Create `dir` if needed and check that it accepts files.
pub fn prepare_data_dir(dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let probe = dir.join(".tiltwarp-probe");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(&probe)
}

/// Serve until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    config: ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    prepare_data_dir(&config.data_dir)?;
    let state = AppState::new(config).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(shutdown)
        .await
}
