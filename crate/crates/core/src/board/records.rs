//! Typed payloads. Result rows are the plain text `TRACKER:CANDIDATE`; every
//! other kind carries a JSON object tagged by `record`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BoardError, BulletinEntry, EntryKind};
use crate::elgamal::Ciphertext;
use crate::engine::{Candidate, MixBatch, RowDecryption, SetupBundle, TallyResult, VoterSetupRow};
use crate::group::{GroupElement, GroupProfile};
use crate::schnorr::Signature;
use crate::tracker::{tracker_display, Tracker};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRow {
    pub tracker_display: String,
    pub candidate_id: String,
}

impl ResultRow {
    pub fn new(tracker: Tracker, candidate_id: &str) -> Self {
        ResultRow { tracker_display: tracker_display(tracker), candidate_id: candidate_id.to_owned() }
    }

    pub fn to_payload(&self) -> Vec<u8> {
        format!("{}:{}", self.tracker_display, self.candidate_id).into_bytes()
    }

    pub fn from_payload(payload: &[u8]) -> Result<Self, String> {
        let text = std::str::from_utf8(payload).map_err(|e| e.to_string())?;
        let (tracker, candidate) = text.split_once(':').ok_or("missing `:` separator")?;
        Ok(ResultRow { tracker_display: tracker.to_owned(), candidate_id: candidate.to_owned() })
    }
}

/// Election-wide public parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionRecord {
    pub election_id: String,
    pub group: GroupProfile,
    pub candidates: Vec<Candidate>,
    pub election_pk: GroupElement,
    pub teller_pks: Vec<GroupElement>,
    pub tracker_pool: Vec<Tracker>,
    pub encrypted_pool: Vec<Ciphertext>,
}

/// Per-voter setup row: keys, the voter's encrypted tracker and commitment `β`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterRecordRow {
    pub voter_id: String,
    pub trapdoor_pk: GroupElement,
    pub signing_pk: GroupElement,
    pub encrypted_tracker: Ciphertext,
    pub beta: GroupElement,
}

impl From<&VoterSetupRow> for VoterRecordRow {
    fn from(v: &VoterSetupRow) -> Self {
        VoterRecordRow {
            voter_id: v.voter_id.clone(),
            trapdoor_pk: v.trapdoor_pk.clone(),
            signing_pk: v.signing_pk.clone(),
            encrypted_tracker: v.encrypted_tracker.clone(),
            beta: v.beta.clone(),
        }
    }
}

/// Posted after every accepted ballot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotRecordRow {
    pub voter_id: String,
    pub trapdoor_pk: GroupElement,
    pub encrypted_tracker: Ciphertext,
    pub beta: GroupElement,
    pub enc_vote: Ciphertext,
    pub signature: Signature,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum BoardRecord {
    Election(ElectionRecord),
    Voter(VoterRecordRow),
    Ballot(BallotRecordRow),
    MixPass {
        teller_id: u32,
        output: MixBatch,
    },
    /// Decryption shares with proofs for every mixed row, plus the counts.
    Tally {
        decryptions: Vec<RowDecryption>,
        counts: BTreeMap<String, u64>,
        invalid_rows: Vec<usize>,
    },
    #[serde(skip)]
    Result(ResultRow),
}

impl BoardRecord {
    pub fn kind(&self) -> EntryKind {
        match self {
            BoardRecord::Election(_) | BoardRecord::Voter(_) => EntryKind::Setup,
            BoardRecord::Ballot(_) => EntryKind::Ballot,
            BoardRecord::MixPass { .. } | BoardRecord::Tally { .. } => EntryKind::Proof,
            BoardRecord::Result(_) => EntryKind::Result,
        }
    }

    pub fn encode(&self) -> (EntryKind, Vec<u8>) {
        let payload = match self {
            BoardRecord::Result(row) => row.to_payload(),
            other => serde_json::to_vec(other).expect("records serialize"),
        };
        (self.kind(), payload)
    }

    pub fn decode(entry: &BulletinEntry) -> Result<Self, BoardError> {
        let err = |reason: String| BoardError::Payload { kind: entry.kind, index: entry.index, reason };
        if entry.kind == EntryKind::Result {
            return ResultRow::from_payload(&entry.payload).map(BoardRecord::Result).map_err(err);
        }
        let record: BoardRecord = serde_json::from_slice(&entry.payload).map_err(|e| err(e.to_string()))?;
        if record.kind() != entry.kind {
            return Err(err(format!("{} record under {} entry", record.kind(), entry.kind)));
        }
        Ok(record)
    }

    pub fn setup_records(bundle: &SetupBundle) -> Vec<BoardRecord> {
        let election = BoardRecord::Election(ElectionRecord {
            election_id: bundle.election_id.clone(),
            group: bundle.group,
            candidates: bundle.candidates.clone(),
            election_pk: bundle.election_pk.clone(),
            teller_pks: bundle.teller_pks.clone(),
            tracker_pool: bundle.tracker_pool.clone(),
            encrypted_pool: bundle.encrypted_pool.clone(),
        });
        std::iter::once(election)
            .chain(bundle.voters.iter().map(|v| BoardRecord::Voter(v.into())))
            .collect()
    }

    /// Proof rows for each mix pass and the tally, followed by one result row
    /// per valid pair in tracker order.
    pub fn publication_records(
        passes: impl IntoIterator<Item = (u32, MixBatch)>,
        result: &TallyResult,
    ) -> Vec<BoardRecord> {
        let mut out: Vec<BoardRecord> = passes
            .into_iter()
            .map(|(teller_id, output)| BoardRecord::MixPass { teller_id, output })
            .collect();
        out.push(BoardRecord::Tally {
            decryptions: result.decryptions.clone(),
            counts: result.counts.clone(),
            invalid_rows: result.invalid_rows.clone(),
        });
        out.extend(
            result
                .pairs
                .iter()
                .map(|p| BoardRecord::Result(ResultRow::new(p.tracker, &p.candidate_id))),
        );
        out
    }
}

/// Convenience view over a board's decoded contents.
#[derive(Debug, Clone, Default)]
pub struct BoardView {
    pub election: Option<ElectionRecord>,
    pub voters: Vec<VoterRecordRow>,
    pub ballots: Vec<(u64, BallotRecordRow)>,
    pub results: Vec<(u64, ResultRow)>,
    pub counts: Option<BTreeMap<String, u64>>,
}

impl BoardView {
    pub fn from_entries(entries: &[BulletinEntry]) -> Result<Self, BoardError> {
        let mut view = BoardView::default();
        for e in entries {
            match e.record()? {
                BoardRecord::Election(r) => view.election = Some(r),
                BoardRecord::Voter(v) => view.voters.push(v),
                BoardRecord::Ballot(b) => view.ballots.push((e.index, b)),
                BoardRecord::Result(r) => view.results.push((e.index, r)),
                BoardRecord::Tally { counts, .. } => view.counts = Some(counts),
                BoardRecord::MixPass { .. } => {}
            }
        }
        Ok(view)
    }

    pub fn voter(&self, voter_id: &str) -> Option<&VoterRecordRow> {
        self.voters.iter().find(|v| v.voter_id == voter_id)
    }
}
