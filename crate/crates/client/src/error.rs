use selene_core::api::{ApiError, ErrorCode, Phase};

use crate::transport::TransportError;
use crate::workflow::Position;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// A `{code, message}` rejection, passed through unchanged.
    #[error("server rejected the request: {0}")]
    Api(ApiError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("unexpected server response (HTTP {status}): {detail}")]
    Protocol { status: u16, detail: String },
    /// Refused locally before any request was sent.
    #[error("operation not available in phase {phase} (needs {needs})")]
    WrongPhase { phase: Phase, needs: &'static str },
    #[error("cannot move from {from:?} to {to:?}")]
    Navigation { from: Position, to: Position },
    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("no signing key loaded; this session can verify but not vote")]
    MissingSigningKey,
    #[error("key file is for group {keyfile}, election uses {election}")]
    KeyGroupMismatch { keyfile: String, election: String },
    #[error("ballot acknowledged at index {0} but the board does not show it")]
    BallotNotConfirmed(u64),
    #[error("board hash chain broken at entry {first_bad_index}")]
    ChainBroken { first_bad_index: u64 },
    #[error("tracker {tracker} does not appear on the board")]
    TrackerNotOnBoard { tracker: String },
    #[error("tracker {tracker} appears in rows {first} and {second}")]
    DuplicateTracker { tracker: String, first: u64, second: u64 },
    #[error("released α does not open the commitment to any pool tracker")]
    CommitmentNotOpened,
    #[error("served β differs from the board's voter row")]
    BetaMismatch,
    #[error("no published result row shows candidate `{0}`")]
    NoSuchCandidateRow(String),
    #[error("malformed board: {0}")]
    MalformedBoard(String),
    #[error("key file: {0}")]
    KeyFile(String),
    #[error("evidence file: {0}")]
    Evidence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ClientError {
    pub fn api_code(&self) -> Option<ErrorCode> {
        match self {
            ClientError::Api(e) => Some(e.code),
            _ => None,
        }
    }

    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        use ErrorCode::*;
        match self {
            ClientError::Api(e) => match e.code {
                BadCredential | InvalidToken | BadAdminCredential => 3,
                WrongPhase | IllegalTransition | ResultsNotPublished => 4,
                _ => 1,
            },
            ClientError::WrongPhase { .. } | ClientError::Navigation { .. } => 4,
            ClientError::ChainBroken { .. }
            | ClientError::TrackerNotOnBoard { .. }
            | ClientError::DuplicateTracker { .. }
            | ClientError::CommitmentNotOpened
            | ClientError::BetaMismatch
            | ClientError::BallotNotConfirmed(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = ClientError> = std::result::Result<T, E>;
