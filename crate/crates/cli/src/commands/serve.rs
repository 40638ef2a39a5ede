use std::io::Write;
use std::path::Path;

use anyhow::Context;
use tiltwarp::Config;
use tiltwarp_service::{prepare_data_dir, ServiceConfig};

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

/// Bind, print `listening on http://<addr>` and serve until SIGINT/SIGTERM.
pub fn serve(addr: &str, port: u16, data_dir: &Path, config: &Config) -> anyhow::Result<()> {
    prepare_data_dir(data_dir).with_context(|| format!("data directory {}", data_dir.display()))?;
    let mut rt = tokio::runtime::Builder::new_multi_thread();
    if let Some(n) = config.threads {
        rt.worker_threads(n);
    }
    let rt = rt.enable_all().build().context("starting runtime")?;
    let service = ServiceConfig {
        data_dir: data_dir.to_path_buf(),
        work_res: config.work_res,
        grid: config.grid,
        boundary: config.boundary,
        undo_depth: tiltwarp_service::session::DEFAULT_UNDO_DEPTH,
    };
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((addr, port))
            .await
            .with_context(|| format!("binding {addr}:{port}"))?;
        println!("listening on http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        tiltwarp_service::serve(listener, service, shutdown_signal()).await?;
        anyhow::Ok(())
    })
}
