use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
pub use selene_core::api::DisplayMode;
use selene_core::GroupProfile;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub listen_addr: SocketAddr,
    /// Holds `events.log` (private) and `board.log` (public).
    pub data_dir: PathBuf,
    pub group: GroupProfile,
    pub display_mode: DisplayMode,
    /// Bearer credential for admin endpoints. Generated into
    /// `<data_dir>/admin.credential` when unset.
    pub admin_credential: Option<String>,
    pub session_ttl_secs: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            listen_addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("selene-data"),
            group: GroupProfile::Prod,
            display_mode: DisplayMode::Baseline,
            admin_credential: None,
            session_ttl_secs: 3600,
        }
    }
}

pub const ENV_ADDR: &str = "SELENE_ADDR";
pub const ENV_DATA_DIR: &str = "SELENE_DATA_DIR";
pub const ENV_GROUP: &str = "SELENE_GROUP";
pub const ENV_DISPLAY_MODE: &str = "SELENE_DISPLAY_MODE";
pub const ENV_ADMIN_CREDENTIAL: &str = "SELENE_ADMIN_CREDENTIAL";

impl ServerConfig {
    /// Reads a TOML file (if given) and applies environment overrides.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => ServerConfig::default(),
        };
        cfg.apply_overrides(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn apply_overrides(&mut self, var: impl Fn(&str) -> Option<String>) -> anyhow::Result<()> {
        if let Some(v) = var(ENV_ADDR) {
            self.listen_addr = v.parse().with_context(|| format!("{ENV_ADDR}={v}"))?;
        }
        if let Some(v) = var(ENV_DATA_DIR) {
            self.data_dir = PathBuf::from(v);
        }
        if let Some(v) = var(ENV_GROUP) {
            self.group = v.parse().map_err(|e| anyhow::anyhow!("{ENV_GROUP}: {e}"))?;
        }
        if let Some(v) = var(ENV_DISPLAY_MODE) {
            self.display_mode = v.parse().map_err(|e| anyhow::anyhow!("{ENV_DISPLAY_MODE}: {e}"))?;
        }
        if let Some(v) = var(ENV_ADMIN_CREDENTIAL) {
            if v.is_empty() {
                bail!("{ENV_ADMIN_CREDENTIAL} is empty");
            }
            self.admin_credential = Some(v);
        }
        Ok(())
    }
}
