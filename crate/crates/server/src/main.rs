use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;
use mle_core::game::PackRegistry;
use mle_core::pack::parse_content_pack;
use mle_server::{router, AppState};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(about = "Companion service for the lockdown escape game")]
struct Args {
    #[arg(long, env = "MLE_BIND_ADDR", default_value = "0.0.0.0:8080")]
    bind: SocketAddr,
    /// Directory holding the event log and uploaded avatar images.
    #[arg(long, env = "MLE_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    /// Bearer token for the admin routes. Admin routes are closed when unset.
    #[arg(long, env = "MLE_ADMIN_TOKEN", hide_env_values = true)]
    admin_token: Option<String>,
    /// Built web client to serve at `/`.
    #[arg(long, env = "MLE_STATIC_DIR")]
    static_dir: Option<PathBuf>,
    /// Extra content packs (JSON) to load next to the default pack.
    #[arg(long = "pack")]
    packs: Vec<PathBuf>,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let args = Args::parse();

    let mut registry = PackRegistry::with_default();
    for path in &args.packs {
        let source = std::fs::read_to_string(path)?;
        let pack = registry.insert(parse_content_pack(&source)?)?;
        tracing::info!(pack = %pack.content().pack_id, version = %pack.content().version, "pack loaded");
    }
    let state = AppState::open(&args.data_dir, registry, args.admin_token.as_deref())?;
    tracing::info!(sessions = state.sessions().len(), data_dir = %args.data_dir.display(), "event log opened");

    let listener = tokio::net::TcpListener::bind(args.bind).await?;
    tracing::info!(addr = %args.bind, "listening");
    axum::serve(listener, router(state, args.static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
