use std::collections::HashSet;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::elgamal::SecretKey;
use crate::error::{CryptoError, EngineError};
use crate::group::{GroupCtx, GroupElement, GroupProfile};

pub const DEFAULT_TELLER_COUNT: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub voter_id: String,
    /// Public half of the voter's commitment trapdoor, `h_i = g^{x_i}`.
    pub trapdoor_pk: GroupElement,
    pub signing_pk: GroupElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionConfig {
    pub election_id: String,
    pub candidates: Vec<Candidate>,
    pub voter_roster: Vec<RosterEntry>,
    #[serde(default = "default_teller_count")]
    pub teller_count: u32,
    pub group_profile: GroupProfile,
}

fn default_teller_count() -> u32 {
    DEFAULT_TELLER_COUNT
}

impl ElectionConfig {
    pub fn ctx(&self) -> GroupCtx {
        GroupCtx::from_profile(self.group_profile)
    }

    pub fn validate(&self, ctx: &GroupCtx) -> Result<(), EngineError> {
        if self.election_id.is_empty() {
            return Err(EngineError::InvalidConfig("election id is empty".into()));
        }
        if self.teller_count == 0 {
            return Err(EngineError::InvalidConfig("at least one teller is required".into()));
        }
        if self.candidates.is_empty() {
            return Err(EngineError::InvalidConfig("no candidates".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.candidates {
            if c.id.is_empty() {
                return Err(EngineError::InvalidConfig("empty candidate id".into()));
            }
            if !seen.insert(c.id.as_str()) {
                return Err(EngineError::DuplicateCandidate(c.id.clone()));
            }
        }
        // candidate k is encoded as g^(k+1); all encodings must be distinct and ≠ 1
        if ctx.scalar_u64(self.candidates.len() as u64).is_err() {
            return Err(EngineError::InvalidConfig("too many candidates for the group".into()));
        }
        let mut seen = HashSet::new();
        for v in &self.voter_roster {
            if v.voter_id.is_empty() {
                return Err(EngineError::InvalidConfig("empty voter id".into()));
            }
            if !seen.insert(v.voter_id.as_str()) {
                return Err(EngineError::DuplicateVoter(v.voter_id.clone()));
            }
            ctx.check_element(&v.trapdoor_pk)?;
            ctx.check_element(&v.signing_pk)?;
            if v.trapdoor_pk == ctx.identity() {
                return Err(CryptoError::ZeroSecretKey.into());
            }
        }
        let bound = ctx.pool_bound();
        if self.voter_roster.len() as u64 > bound {
            return Err(EngineError::PoolTooSmall { roster: self.voter_roster.len(), bound });
        }
        Ok(())
    }

    pub fn roster_entry(&self, voter_id: &str) -> Option<&RosterEntry> {
        self.voter_roster.iter().find(|v| v.voter_id == voter_id)
    }
}

/// `candidate k ↦ g^(k+1)` and back.
#[derive(Debug, Clone)]
pub struct CandidateTable {
    encoded: Vec<(GroupElement, String)>,
}

impl CandidateTable {
    pub fn new(ctx: &GroupCtx, candidates: &[Candidate]) -> Self {
        let encoded = candidates
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let exponent = ctx.scalar_u64(k as u64 + 1).expect("validated candidate count");
                (ctx.exp(&exponent), c.id.clone())
            })
            .collect();
        CandidateTable { encoded }
    }

    pub fn encode(&self, candidate_id: &str) -> Option<&GroupElement> {
        self.encoded.iter().find(|(_, id)| id == candidate_id).map(|(e, _)| e)
    }

    pub fn decode(&self, e: &GroupElement) -> Result<&str, CryptoError> {
        self.encoded
            .iter()
            .find(|(enc, _)| enc == e)
            .map(|(_, id)| id.as_str())
            .ok_or(CryptoError::UnknownCandidate)
    }
}

/// Secret keys handed to a voter by the provisioning tool.
#[derive(Debug, Clone)]
pub struct VoterKeys {
    pub voter_id: String,
    pub trapdoor: SecretKey,
    pub signing: SecretKey,
}

impl VoterKeys {
    pub fn generate<R: RngCore + CryptoRng>(ctx: &GroupCtx, voter_id: &str, rng: &mut R) -> Self {
        VoterKeys {
            voter_id: voter_id.to_owned(),
            trapdoor: SecretKey::random(ctx, rng),
            signing: SecretKey::random(ctx, rng),
        }
    }

    pub fn roster_entry(&self, ctx: &GroupCtx) -> RosterEntry {
        RosterEntry {
            voter_id: self.voter_id.clone(),
            trapdoor_pk: self.trapdoor.public_key(ctx),
            signing_pk: self.signing.public_key(ctx),
        }
    }
}
