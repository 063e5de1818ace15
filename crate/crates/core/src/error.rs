use thiserror::Error;

/// Failures of the pure cryptographic layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("invalid group parameters: {0}")]
    InvalidGroup(String),
    #[error("value is not a member of the prime-order subgroup")]
    NotInSubgroup,
    #[error("scalar is not below the group order")]
    ScalarOutOfRange,
    #[error("secret key must be non-zero")]
    ZeroSecretKey,
    #[error("tracker value {0} is outside the group's tracker range")]
    TrackerOutOfRange(u64),
    #[error("group element does not match any tracker in the pool")]
    UnknownTracker,
    #[error("group element does not match any candidate")]
    UnknownCandidate,
    #[error("malformed tracker string `{0}`")]
    BadTrackerDisplay(String),
    #[error("decoding failed: {0}")]
    Decode(String),
}

/// Failures of the Teller ceremonies and ballot intake.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid election configuration: {0}")]
    InvalidConfig(String),
    #[error("duplicate voter id `{0}`")]
    DuplicateVoter(String),
    #[error("duplicate candidate id `{0}`")]
    DuplicateCandidate(String),
    #[error("roster of {roster} voters exceeds the tracker pool bound {bound}")]
    PoolTooSmall { roster: usize, bound: u64 },
    #[error("unknown voter `{0}`")]
    UnknownVoter(String),
    #[error("voter `{0}` has already voted")]
    AlreadyVoted(String),
    #[error("ballot signature does not verify")]
    BadSignature,
    #[error("ballot ciphertext is malformed")]
    MalformedBallot,
    #[error("election is not accepting ballots")]
    ElectionNotInVotePhase,
    #[error("results have not been published")]
    ResultsNotPublished,
    #[error("results have already been computed")]
    AlreadyTallied,
    #[error("teller {teller} failed: {reason}")]
    TellerFailure { teller: u32, reason: String },
    #[error("decryption proof from teller {teller} does not verify (row {row})")]
    InvalidDecryptionProof { teller: u32, row: usize },
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}
