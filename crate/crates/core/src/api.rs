//! JSON bodies of the election server's HTTP API, shared by server and client.
//! Group elements, scalars and hashes travel as hex of their canonical bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::board::BulletinEntry;
use crate::elgamal::Ciphertext;
use crate::engine::{AlphaShare, Candidate, ElectionConfig};
use crate::group::{GroupElement, GroupProfile};
use crate::schnorr::Signature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Setup,
    Vote,
    Published,
    Verify,
    Closed,
}

impl Phase {
    pub const ALL: [Phase; 5] = [Phase::Setup, Phase::Vote, Phase::Published, Phase::Verify, Phase::Closed];

    pub fn next(self) -> Option<Phase> {
        match self {
            Phase::Setup => Some(Phase::Vote),
            Phase::Vote => Some(Phase::Published),
            Phase::Published => Some(Phase::Verify),
            Phase::Verify => Some(Phase::Closed),
            Phase::Closed => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::Vote => "vote",
            Phase::Published => "published",
            Phase::Verify => "verify",
            Phase::Closed => "closed",
        }
    }

    /// Board results are visible from here on.
    pub fn results_visible(self) -> bool {
        matches!(self, Phase::Published | Phase::Verify)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phase::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown phase `{s}`"))
    }
}

/// Whether clients show the security-process panels while waiting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisplayMode {
    #[default]
    Baseline,
    Extended,
}

impl FromStr for DisplayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(DisplayMode::Baseline),
            "extended" => Ok(DisplayMode::Extended),
            other => Err(format!("unknown display mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCode {
    BadCredential,
    InvalidToken,
    WrongPhase,
    AlreadyVoted,
    BadSignature,
    MalformedBallot,
    IllegalTransition,
    BadAdminCredential,
    RangeOutOfBounds,
    AlreadyConfigured,
    InvalidConfig,
    ResultsNotPublished,
    MalformedRequest,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{code:?}: {message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError { code, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthRequest {
    pub voter_id: String,
    pub credential: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthResponse {
    pub token: String,
    pub expires_in_secs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusResponse {
    pub voter_id: String,
    pub election_id: String,
    pub phase: Phase,
    pub has_voted: bool,
    pub candidates: Vec<Candidate>,
    pub display_mode: DisplayMode,
    pub group: GroupProfile,
    pub election_pk: GroupElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotRequest {
    pub enc_vote: Ciphertext,
    pub sig: Signature,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotResponse {
    pub index: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardQuery {
    pub from: Option<u64>,
    pub to: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardResponse {
    /// Board length at the time of the read.
    pub length: u64,
    pub entries: Vec<BulletinEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaResponse {
    pub voter_id: String,
    pub shares: Vec<AlphaShare>,
    pub beta: GroupElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRequest {
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionResponse {
    pub phase: Phase,
    pub board_length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupRequest {
    pub config: ElectionConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupResponse {
    pub election_id: String,
    /// Freshly generated login credentials; the server keeps only salted hashes.
    pub credentials: BTreeMap<String, String>,
    pub board_length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdminStatusResponse {
    pub phase: Phase,
    pub election_id: Option<String>,
    pub roster_size: usize,
    pub ballots_cast: usize,
    pub board_length: u64,
    /// Present once results are published.
    pub counts: Option<BTreeMap<String, u64>>,
}
