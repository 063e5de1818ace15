//! Teller ceremonies: setup and tracker assignment, ballot intake, the
//! re-encryption mix, joint tally with decryption proofs, and α-share release.
//!
//! Tellers run in-process, but every message between them (mix pass outputs,
//! partial decryptions) is encoded to canonical bytes and decoded again by the
//! receiver, so moving a Teller behind a network hop needs no format change.

mod config;
mod election;
mod mix;
mod setup;
mod tally;
mod teller;

pub use config::{Candidate, CandidateTable, ElectionConfig, RosterEntry, VoterKeys, DEFAULT_TELLER_COUNT};
pub use election::{
    ballot_message, encode_vote, BallotRecord, Election, PublishedTally, TallyOutcome,
};
pub use mix::{apply_mix, mix, mix_with_plans, MixBatch, MixPass, MixPlan, MixRow, MixTranscript, Mixable};
pub use setup::{
    assign_trackers, assign_trackers_with_plans, commit_tracker, setup_election, SetupBundle,
    TrackerAssignment, VoterSetupRow,
};
pub use tally::{combine_tally, tally, PartialDecryptions, RowDecryption, TallyContext, TallyPair, TallyResult};
pub use teller::{assemble_alpha, combine_shares, release_alpha, AlphaShare, DecryptionShare, TellerState};
