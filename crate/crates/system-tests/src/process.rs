//! The server binary as a child process, for crash tests.

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};

use anyhow::{anyhow, bail, Context};
use selene_core::GroupProfile;

use crate::fixture::ADMIN;

/// `target/<profile>/selene-server`, built on demand if this test binary was
/// compiled without it.
pub fn server_binary() -> anyhow::Result<PathBuf> {
    let exe = std::env::current_exe()?;
    let profile_dir = exe
        .parent()
        .and_then(|deps| deps.parent())
        .ok_or_else(|| anyhow!("unexpected test binary location {}", exe.display()))?;
    let bin = profile_dir.join(format!("selene-server{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let status = Command::new(cargo)
            .args(["build", "-p", "selene-server", "--bin", "selene-server"])
            .status()
            .context("building selene-server")?;
        if !status.success() || !bin.exists() {
            bail!("selene-server binary not available at {}", bin.display());
        }
    }
    Ok(bin)
}

pub struct ServerProcess {
    child: Child,
    pub base_url: String,
}

impl ServerProcess {
    pub fn spawn(bin: &Path, dir: &Path, group: GroupProfile) -> anyhow::Result<Self> {
        let mut child = Command::new(bin)
            .env("SELENE_ADDR", "127.0.0.1:0")
            .env("SELENE_DATA_DIR", dir)
            .env("SELENE_GROUP", group.as_str())
            .env("SELENE_ADMIN_CREDENTIAL", ADMIN)
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .spawn()
            .context("spawning selene-server")?;
        let mut line = String::new();
        BufReader::new(child.stdout.take().expect("piped")).read_line(&mut line)?;
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .ok_or_else(|| anyhow!("unexpected startup line {line:?}"))?;
        Ok(ServerProcess { base_url: format!("http://{addr}"), child })
    }

    /// SIGKILL, no shutdown path runs.
    pub fn kill(mut self) -> anyhow::Result<()> {
        self.child.kill()?;
        self.child.wait()?;
        Ok(())
    }
}

impl Drop for ServerProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
