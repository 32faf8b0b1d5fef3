use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;
use polygreen_service::{router, AppState, ServiceConfig};

#[derive(Debug, Parser)]
#[command(
    name = "polygreen-service",
    version,
    about = "Cage deformation sessions over HTTP"
)]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory for field snapshots, one `<id>.pgc` per session.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    /// Allowed CORS origin; repeat for several. Any origin when omitted.
    #[arg(long = "allow-origin")]
    allow_origins: Vec<String>,
}

#[tokio::main]
async fn main() {
    let args = Args::parse();
    if let Some(dir) = &args.snapshot_dir {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: {}: {e}", dir.display());
            std::process::exit(3);
        }
    }
    let state = AppState::new(ServiceConfig {
        snapshot_dir: args.snapshot_dir,
        allowed_origins: args.allow_origins,
    });
    let listener = match tokio::net::TcpListener::bind(args.addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}: {e}", args.addr);
            std::process::exit(3);
        }
    };
    eprintln!("listening on http://{}", args.addr);
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
    {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
