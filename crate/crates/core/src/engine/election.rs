use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::config::{CandidateTable, ElectionConfig};
use super::mix::{mix, MixBatch, MixPlan, MixRow, MixTranscript};
use super::setup::{assign_trackers, setup_election, SetupBundle, TrackerAssignment};
use super::tally::{tally, TallyContext, TallyResult};
use super::teller::{release_alpha, AlphaShare, TellerState};
use crate::elgamal::Ciphertext;
use crate::encoding::CanonicalWriter;
use crate::error::EngineError;
use crate::group::{GroupCtx, GroupElement};
use crate::schnorr::{verify_sig, Signature};

/// Bytes a voter signs: `(election_id, voter_id, α, β)`, length-prefixed.
pub fn ballot_message(election_id: &str, voter_id: &str, enc_vote: &Ciphertext) -> Vec<u8> {
    let mut w = CanonicalWriter::new();
    w.str(election_id).str(voter_id).put(enc_vote);
    w.into_bytes()
}

/// Encodes `candidate_id` for the given election, or `None` if unknown.
pub fn encode_vote(
    ctx: &GroupCtx,
    bundle: &SetupBundle,
    candidate_id: &str,
) -> Option<GroupElement> {
    CandidateTable::new(ctx, &bundle.candidates).encode(candidate_id).cloned()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotRecord {
    pub voter_id: String,
    pub enc_vote: Ciphertext,
    pub signature: Signature,
    pub encrypted_tracker: Ciphertext,
}

/// Public outcome of closing the election.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedTally {
    pub input: MixBatch,
    pub mix: MixTranscript,
    pub result: TallyResult,
}

impl PublishedTally {
    pub fn mixed(&self) -> &MixBatch {
        self.mix.output(&self.input)
    }
}

/// Result of [`Election::compute_tally`]: the public part plus the Tellers'
/// updated secret state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyOutcome {
    pub published: PublishedTally,
    pub tellers: Vec<TellerState>,
}

/// Single-owner state machine tying the ceremonies together.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "ElectionSnapshot", into = "ElectionSnapshot")]
pub struct Election {
    ctx: GroupCtx,
    snapshot: ElectionSnapshot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ElectionSnapshot {
    config: ElectionConfig,
    bundle: SetupBundle,
    tellers: Vec<TellerState>,
    assignments: Vec<TrackerAssignment>,
    ballots: Vec<BallotRecord>,
    voting_open: bool,
    voting_closed: bool,
    published: Option<PublishedTally>,
}

impl From<ElectionSnapshot> for Election {
    fn from(snapshot: ElectionSnapshot) -> Self {
        Election { ctx: snapshot.config.ctx(), snapshot }
    }
}

impl From<Election> for ElectionSnapshot {
    fn from(e: Election) -> Self {
        e.snapshot
    }
}

impl PartialEq for Election {
    fn eq(&self, other: &Self) -> bool {
        self.snapshot == other.snapshot
    }
}

impl Election {
    /// Key generation, tracker pool, and the assignment ceremony.
    pub fn setup<R: RngCore + CryptoRng>(cfg: ElectionConfig, rng: &mut R) -> Result<Self, EngineError> {
        let (mut bundle, mut tellers) = setup_election(&cfg, rng)?;
        let assignments = assign_trackers(&cfg, &mut bundle, &mut tellers, rng)?;
        Ok(Self::from_parts(cfg, bundle, tellers, assignments))
    }

    pub fn from_parts(
        config: ElectionConfig,
        bundle: SetupBundle,
        tellers: Vec<TellerState>,
        assignments: Vec<TrackerAssignment>,
    ) -> Self {
        ElectionSnapshot {
            config,
            bundle,
            tellers,
            assignments,
            ballots: Vec::new(),
            voting_open: false,
            voting_closed: false,
            published: None,
        }
        .into()
    }

    pub fn ctx(&self) -> &GroupCtx {
        &self.ctx
    }

    pub fn config(&self) -> &ElectionConfig {
        &self.snapshot.config
    }

    pub fn bundle(&self) -> &SetupBundle {
        &self.snapshot.bundle
    }

    pub fn tellers(&self) -> &[TellerState] {
        &self.snapshot.tellers
    }

    pub fn assignments(&self) -> &[TrackerAssignment] {
        &self.snapshot.assignments
    }

    pub fn assignment(&self, voter_id: &str) -> Option<&TrackerAssignment> {
        self.snapshot.assignments.iter().find(|a| a.voter_id == voter_id)
    }

    pub fn ballots(&self) -> &[BallotRecord] {
        &self.snapshot.ballots
    }

    pub fn has_voted(&self, voter_id: &str) -> bool {
        self.snapshot.ballots.iter().any(|b| b.voter_id == voter_id)
    }

    pub fn is_voting_open(&self) -> bool {
        self.snapshot.voting_open
    }

    pub fn published(&self) -> Option<&PublishedTally> {
        self.snapshot.published.as_ref()
    }

    pub fn open_voting(&mut self) -> Result<(), EngineError> {
        if self.snapshot.voting_open || self.snapshot.voting_closed {
            return Err(EngineError::ElectionNotInVotePhase);
        }
        self.snapshot.voting_open = true;
        Ok(())
    }

    pub fn close_voting(&mut self) -> Result<(), EngineError> {
        if !self.snapshot.voting_open {
            return Err(EngineError::ElectionNotInVotePhase);
        }
        self.snapshot.voting_open = false;
        self.snapshot.voting_closed = true;
        Ok(())
    }

    /// Checks and records a ballot without mutating anything on failure.
    pub fn check_ballot(
        &self,
        voter_id: &str,
        enc_vote: &Ciphertext,
        sig: &Signature,
    ) -> Result<BallotRecord, EngineError> {
        if !self.snapshot.voting_open {
            return Err(EngineError::ElectionNotInVotePhase);
        }
        let voter = self
            .snapshot
            .config
            .roster_entry(voter_id)
            .ok_or_else(|| EngineError::UnknownVoter(voter_id.to_owned()))?;
        if self.has_voted(voter_id) {
            return Err(EngineError::AlreadyVoted(voter_id.to_owned()));
        }
        enc_vote.validate(&self.ctx).map_err(|_| EngineError::MalformedBallot)?;
        let message = ballot_message(&self.snapshot.config.election_id, voter_id, enc_vote);
        if !verify_sig(&self.ctx, &voter.signing_pk, &message, sig) {
            return Err(EngineError::BadSignature);
        }
        let assignment = self.assignment(voter_id).expect("every roster voter has an assignment");
        Ok(BallotRecord {
            voter_id: voter_id.to_owned(),
            enc_vote: enc_vote.clone(),
            signature: sig.clone(),
            encrypted_tracker: assignment.encrypted_tracker.clone(),
        })
    }

    pub fn accept_ballot(
        &mut self,
        voter_id: &str,
        enc_vote: &Ciphertext,
        sig: &Signature,
    ) -> Result<BallotRecord, EngineError> {
        let record = self.check_ballot(voter_id, enc_vote, sig)?;
        self.snapshot.ballots.push(record.clone());
        Ok(record)
    }

    /// Pairs of (encrypted tracker, encrypted vote) in cast order.
    pub fn mix_input(&self) -> MixBatch {
        MixBatch {
            rows: self
                .snapshot
                .ballots
                .iter()
                .map(|b| MixRow { enc_tracker: b.encrypted_tracker.clone(), enc_vote: b.enc_vote.clone() })
                .collect(),
        }
    }

    /// Mixes and jointly decrypts the cast ballots. Pure with respect to
    /// `self`; apply the outcome with [`Election::record_tally`].
    pub fn compute_tally<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Result<TallyOutcome, EngineError> {
        if !self.snapshot.voting_closed {
            return Err(EngineError::ElectionNotInVotePhase);
        }
        if self.snapshot.published.is_some() {
            return Err(EngineError::AlreadyTallied);
        }
        let ctx = &self.ctx;
        let bundle = &self.snapshot.bundle;
        let mut tellers = self.snapshot.tellers.clone();
        let input = self.mix_input();
        let transcript = mix(ctx, &bundle.election_pk, &input, &mut tellers, rng)?;
        let table = bundle.tracker_table(ctx);
        let tc = TallyContext {
            teller_pks: &bundle.teller_pks,
            trackers: &table,
            candidates: &bundle.candidates,
        };
        let result = tally(ctx, transcript.output(&input), &mut tellers, &tc, rng)?;
        Ok(TallyOutcome {
            published: PublishedTally { input, mix: transcript, result },
            tellers,
        })
    }

    pub fn record_tally(&mut self, outcome: TallyOutcome) -> Result<(), EngineError> {
        if self.snapshot.published.is_some() {
            return Err(EngineError::AlreadyTallied);
        }
        if outcome.published.input != self.mix_input() {
            return Err(EngineError::InvalidConfig("tally was computed over different ballots".into()));
        }
        self.snapshot.tellers = outcome.tellers;
        self.snapshot.published = Some(outcome.published);
        Ok(())
    }

    pub fn release_alpha(&self, voter_id: &str) -> Result<Vec<AlphaShare>, EngineError> {
        if self.assignment(voter_id).is_none() {
            return Err(EngineError::UnknownVoter(voter_id.to_owned()));
        }
        release_alpha(&self.ctx, voter_id, &self.snapshot.tellers)
    }

    pub fn tally_mix_plans(&self) -> Vec<Option<&MixPlan>> {
        self.snapshot.tellers.iter().map(|t| t.tally_mix_plan()).collect()
    }
}
