//! HTTP+JSON election server.
//!
//! One process serves one election directory. State changes go through a
//! single writer ([`store::Store`]) that logs each event before applying it;
//! reads share the lock. The board is public; everything under `/api/admin`
//! needs the admin bearer credential, the voter endpoints a session token.

pub mod config;
pub mod error;
mod routes;
pub mod store;

use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use anyhow::Context;
use rand::RngCore;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use config::{DisplayMode, ServerConfig};
pub use routes::router;
use routes::Sessions;
use store::Store;

pub const ADMIN_CREDENTIAL_FILE: &str = "admin.credential";

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    store: RwLock<Store>,
    sessions: Sessions,
    config: ServerConfig,
    admin_credential: String,
}

impl AppState {
    /// Opens (or initializes) the election directory named by the config.
    pub fn open(config: ServerConfig) -> anyhow::Result<Self> {
        let store = Store::open(&config.data_dir)
            .with_context(|| format!("opening election directory {}", config.data_dir.display()))?;
        let admin_credential = match &config.admin_credential {
            Some(c) => c.clone(),
            None => load_or_create_admin_credential(&config.data_dir)?,
        };
        Ok(AppState {
            inner: Arc::new(Inner {
                store: RwLock::new(store),
                sessions: Sessions::new(Duration::from_secs(config.session_ttl_secs)),
                config,
                admin_credential,
            }),
        })
    }

    pub fn config(&self) -> &ServerConfig {
        &self.inner.config
    }
}

fn load_or_create_admin_credential(dir: &Path) -> anyhow::Result<String> {
    let path = dir.join(ADMIN_CREDENTIAL_FILE);
    if let Ok(existing) = std::fs::read_to_string(&path) {
        return Ok(existing.trim().to_owned());
    }
    let mut raw = [0u8; 24];
    rand::rngs::OsRng.fill_bytes(&mut raw);
    let credential = hex::encode(raw);
    let mut options = std::fs::OpenOptions::new();
    options.write(true).create_new(true);
    #[cfg(unix)]
    std::os::unix::fs::OpenOptionsExt::mode(&mut options, 0o600);
    std::io::Write::write_all(&mut options.open(&path)?, credential.as_bytes())?;
    tracing::info!(path = %path.display(), "generated admin credential");
    Ok(credential)
}

/// A server bound to a socket and running on the current Tokio runtime.
pub struct RunningServer {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl RunningServer {
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(mut self) -> anyhow::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        (&mut self.task).await??;
        Ok(())
    }

    /// Drops the server without draining, as close to a crash as a task gets.
    pub fn abort(self) {
        self.task.abort();
    }
}

pub async fn start(config: ServerConfig) -> anyhow::Result<RunningServer> {
    let listener = TcpListener::bind(config.listen_addr)
        .await
        .with_context(|| format!("binding {}", config.listen_addr))?;
    let addr = listener.local_addr()?;
    let app = router(AppState::open(config)?);
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    Ok(RunningServer { addr, shutdown: Some(tx), task })
}
