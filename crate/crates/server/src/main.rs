use std::path::PathBuf;

use clap::Parser;
use selene_server::ServerConfig;
use tracing_subscriber::EnvFilter;

/// Selene election server.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// TOML config file; SELENE_* environment variables override its fields.
    #[arg(long, env = "SELENE_CONFIG")]
    config: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let args = Args::parse();
    let config = ServerConfig::load(args.config.as_deref())?;
    let server = selene_server::start(config.clone()).await?;
    tracing::info!(addr = %server.addr, group = config.group.as_str(), data_dir = %config.data_dir.display(), "listening");
    // printed for scripts that bind port 0
    println!("listening on {}", server.addr);
    tokio::signal::ctrl_c().await?;
    tracing::info!("shutting down");
    server.shutdown().await
}
