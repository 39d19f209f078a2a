//! HTTP service around the turkpos tagger: analyses, human corrections, and
//! retraining with an atomic model swap.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/api/analyses` | tag `{"text": ...}` |
//! | POST | `/api/documents` | tag an uploaded UTF-8 text file |
//! | GET | `/api/analyses/{id}` | stored analysis |
//! | GET | `/api/analyses/{id}/export?format=tsv\|structured` | export |
//! | GET | `/api/tagset` | assignable tags |
//! | GET | `/api/model` | serving model summary |
//! | POST/GET | `/api/corrections` | submit / list corrections |
//! | GET | `/api/corrections/{id}` | one correction |
//! | POST/GET | `/api/admin/retrain` | start / poll retraining |

pub mod api;
pub mod config;
pub mod state;
pub mod store;

use std::future::Future;
use std::sync::Arc;

pub use api::{router, API_VERSION, API_VERSION_HEADER};
pub use config::ServiceConfig;
pub use state::{AppState, JobState, JobStatus, ServiceError};
pub use store::{AnalysisRecord, CorrectionRecord};
use tokio::net::TcpListener;

/// Serves until `shutdown` resolves.
pub async fn serve_on(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Opens the state and serves on the configured address until Ctrl-C.
pub async fn run(config: ServiceConfig) -> anyhow::Result<()> {
    let listen = config.listen;
    let state = AppState::open(config)?;
    let listener = TcpListener::bind(listen).await?;
    tracing::info!(address = %listener.local_addr()?, "listening");
    serve_on(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
