//! A live server with a configured election and provisioned voters.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;

use anyhow::{anyhow, Context};
use rand::rngs::OsRng;
use selene_client::{ApiClient, ClientSession, HttpTransport, RecordingTransport, SessionKeys, Transport};
use selene_core::api::{Phase, TransitionResponse};
use selene_core::board::BulletinEntry;
use selene_core::engine::{Candidate, ElectionConfig, VoterKeys};
use selene_core::{GroupCtx, GroupProfile, Scalar, SecretKey};
use selene_server::{RunningServer, ServerConfig};
use tempfile::TempDir;

pub const ADMIN: &str = "system-test-admin";

pub fn server_config(dir: &Path, group: GroupProfile) -> ServerConfig {
    ServerConfig {
        listen_addr: SocketAddr::from(([127, 0, 0, 1], 0)),
        data_dir: dir.to_path_buf(),
        group,
        admin_credential: Some(ADMIN.to_owned()),
        ..ServerConfig::default()
    }
}

pub fn candidates(ids: &[&str]) -> Vec<Candidate> {
    ids.iter().map(|id| Candidate { id: (*id).to_owned(), label: format!("Candidate {id}") }).collect()
}

pub fn voter_id(i: usize) -> String {
    format!("voter-{i:02}")
}

/// Voters `voter-00..` with fresh keys, and the matching election config.
pub fn provision(
    profile: GroupProfile,
    voters: usize,
    tellers: u32,
    candidate_ids: &[&str],
) -> (Vec<VoterKeys>, ElectionConfig) {
    let ctx = GroupCtx::from_profile(profile);
    let keys: Vec<VoterKeys> = (0..voters).map(|i| VoterKeys::generate(&ctx, &voter_id(i), &mut OsRng)).collect();
    let config = ElectionConfig {
        election_id: format!("acceptance-{profile}-{voters}"),
        candidates: candidates(candidate_ids),
        voter_roster: keys.iter().map(|k| k.roster_entry(&ctx)).collect(),
        teller_count: tellers,
        group_profile: profile,
    };
    (keys, config)
}

pub struct LiveElection {
    pub dir: TempDir,
    pub server: RunningServer,
    pub profile: GroupProfile,
    pub ctx: GroupCtx,
    pub config: ElectionConfig,
    pub keys: Vec<VoterKeys>,
    pub credentials: BTreeMap<String, String>,
}

impl LiveElection {
    /// Starts an in-process server and runs admin setup. Setup rejections
    /// come back as errors carrying the server's code and message.
    pub async fn launch(profile: GroupProfile, voters: usize, tellers: u32, candidate_ids: &[&str]) -> anyhow::Result<Self> {
        let dir = tempfile::tempdir()?;
        let server = selene_server::start(server_config(dir.path(), profile)).await?;
        let (keys, config) = provision(profile, voters, tellers, candidate_ids);
        let admin = ApiClient::new(HttpTransport::new(&server.base_url()));
        let setup = admin.admin_setup(ADMIN, config.clone()).await;
        let setup = match setup {
            Ok(s) => s,
            Err(e) => {
                server.abort();
                return Err(anyhow!(e)).context("admin setup");
            }
        };
        Ok(LiveElection {
            dir,
            server,
            profile,
            ctx: GroupCtx::from_profile(profile),
            config,
            keys,
            credentials: setup.credentials,
        })
    }

    pub fn base_url(&self) -> String {
        self.server.base_url()
    }

    pub fn http(&self) -> HttpTransport {
        HttpTransport::new(&self.base_url())
    }

    pub fn admin(&self) -> ApiClient<HttpTransport> {
        ApiClient::new(self.http())
    }

    pub async fn transition(&self, phase: Phase) -> anyhow::Result<TransitionResponse> {
        Ok(self.admin().admin_transition(ADMIN, phase).await?)
    }

    pub fn voter_count(&self) -> usize {
        self.keys.len()
    }

    pub fn session_keys(&self, i: usize) -> SessionKeys {
        SessionKeys::from_voter_keys(self.profile, &self.keys[i])
    }

    pub async fn login(&self, i: usize) -> anyhow::Result<ClientSession<RecordingTransport<HttpTransport>>> {
        self.login_via(i, RecordingTransport::new(self.http()), self.session_keys(i)).await
    }

    pub async fn login_via<T: Transport>(&self, i: usize, transport: T, keys: SessionKeys) -> anyhow::Result<ClientSession<T>> {
        let id = &self.keys[i].voter_id;
        let cred = self.credentials.get(id).ok_or_else(|| anyhow!("no credential for {id}"))?;
        Ok(ClientSession::login(transport, id, cred, keys).await?)
    }

    pub async fn board(&self) -> anyhow::Result<Vec<BulletinEntry>> {
        Ok(self.admin().board().await?)
    }

    pub fn events(&self) -> anyhow::Result<Vec<serde_json::Value>> {
        read_event_log(self.dir.path())
    }

    /// The joint election secret, summed from the Teller shares in the
    /// server's private event log.
    pub fn oracle_secret(&self) -> anyhow::Result<SecretKey> {
        let shares = key_shares(&self.events()?)?;
        let mut x = Scalar::from_u64_unchecked(0);
        for s in &shares {
            x = self.ctx.scalar_add(&x, &Scalar::from_hex(s)?);
        }
        Ok(SecretKey::new(&self.ctx, x)?)
    }

    /// Same as [`LiveElection::oracle_secret`], as a `u64` for the small group.
    pub fn oracle_secret_u64(&self) -> anyhow::Result<u64> {
        let shares = key_shares(&self.events()?)?;
        let mut x = 0u64;
        for s in &shares {
            let v = Scalar::from_hex(s)?.to_u64().ok_or_else(|| anyhow!("share does not fit u64"))?;
            x = (x + v) % crate::oracle::Q;
        }
        Ok(x)
    }
}

pub fn read_event_log(dir: &Path) -> anyhow::Result<Vec<serde_json::Value>> {
    let text = std::fs::read_to_string(dir.join("events.log"))?;
    text.lines().map(|l| serde_json::from_str(l).context("event line")).collect()
}

/// Hex `key_share` values of every Teller in the setup event.
fn key_shares(events: &[serde_json::Value]) -> anyhow::Result<Vec<String>> {
    fn collect(v: &serde_json::Value, out: &mut Vec<String>) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, val) in map {
                    match (k.as_str(), val.as_str()) {
                        ("key_share", Some(s)) => out.push(s.to_owned()),
                        _ => collect(val, out),
                    }
                }
            }
            serde_json::Value::Array(items) => items.iter().for_each(|x| collect(x, out)),
            _ => {}
        }
    }
    let setup = events
        .iter()
        .find(|e| e["event"]["type"] == "setup")
        .ok_or_else(|| anyhow!("no setup event"))?;
    let mut out = Vec::new();
    collect(setup, &mut out);
    anyhow::ensure!(!out.is_empty(), "setup event has no key shares");
    Ok(out)
}
