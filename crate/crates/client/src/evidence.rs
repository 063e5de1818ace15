//! Verification verdicts and the portable evidence file.
//!
//! [`assess`] turns what a voter fetched (α-shares, β, the board) plus their
//! trapdoor key into an [`Evidence`] record. The record carries a
//! Chaum–Pedersen proof that `(α, β)` opens to the computed tracker under the
//! voter's published trapdoor key, so [`audit`] can re-derive the verdict
//! from the file alone, without any secret.

use std::path::Path;

use rand::{CryptoRng, RngCore};
use selene_core::board::{
    find_tracker_row, verify_chain, BoardError, BoardRecord, BulletinEntry, ChainVerdict, ElectionRecord,
    VoterRecordRow,
};
use selene_core::engine::{assemble_alpha, AlphaShare};
use selene_core::{
    encode_tracker, open_commitment, parse_tracker_display, prove_decryption, verify_decryption, Ciphertext,
    DecryptionProof, GroupCtx, GroupElement, GroupProfile, SecretKey, TrackerTable,
};
use serde::{Deserialize, Serialize};

use crate::error::{ClientError, Result};

pub const EVIDENCE_FORMAT: &str = "selene-evidence v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    /// Row found and shows the remembered choice.
    Match,
    /// Row found but shows another candidate.
    Mismatch,
    /// Row found; no cast choice was retained to compare with.
    Located,
    ChainBroken { first_bad_index: u64 },
    TrackerNotOnBoard,
    DuplicateTracker { first: u64, second: u64 },
    CommitmentNotOpened,
    BetaMismatch,
    MalformedBoard { reason: String },
}

impl Verdict {
    pub fn is_failure(&self) -> bool {
        !matches!(self, Verdict::Match | Verdict::Located)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub index: u64,
    pub tracker_display: String,
    pub candidate_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub format: String,
    pub election_id: String,
    pub voter_id: String,
    pub group: GroupProfile,
    pub beta: GroupElement,
    pub alpha_shares: Vec<AlphaShare>,
    pub alpha: GroupElement,
    pub tracker_display: Option<String>,
    /// Proves `β / α^x = g^tracker` for the voter's published `g^x`.
    pub opening_proof: Option<DecryptionProof>,
    pub cast_choice: Option<String>,
    pub row: Option<EvidenceRow>,
    pub verdict: Verdict,
    pub board: Vec<BulletinEntry>,
}

/// What [`crate::ClientSession::verify_vote`] reports on success.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub tracker_display: String,
    pub row_index: u64,
    pub row_candidate: String,
    pub chain_ok: bool,
    /// `None` unless a cast choice was retained.
    pub matched: Option<bool>,
}

/// Board contents decoded leniently: entries that fail to decode are skipped.
struct Decoded {
    election: Option<ElectionRecord>,
    voter: Option<VoterRecordRow>,
}

fn decode(board: &[BulletinEntry], voter_id: &str) -> Decoded {
    let mut out = Decoded { election: None, voter: None };
    for record in board.iter().filter_map(|e| e.record().ok()) {
        match record {
            BoardRecord::Election(e) if out.election.is_none() => out.election = Some(e),
            BoardRecord::Voter(v) if v.voter_id == voter_id && out.voter.is_none() => out.voter = Some(v),
            _ => {}
        }
    }
    out
}

/// Failures visible without opening the commitment, in priority order.
fn board_failures(chain: ChainVerdict, decoded: &Decoded, beta: &GroupElement) -> Vec<Verdict> {
    let mut out = Vec::new();
    if let ChainVerdict::Broken { first_bad_index } = chain {
        out.push(Verdict::ChainBroken { first_bad_index });
    }
    match &decoded.voter {
        Some(v) if v.beta != *beta => out.push(Verdict::BetaMismatch),
        Some(_) => {}
        None => out.push(Verdict::MalformedBoard { reason: "no setup row for this voter".into() }),
    }
    if decoded.election.is_none() {
        out.push(Verdict::MalformedBoard { reason: "no election record".into() });
    }
    out
}

fn locate(board: &[BulletinEntry], display: &str) -> std::result::Result<EvidenceRow, Verdict> {
    match find_tracker_row(board, display) {
        Ok((index, row)) => Ok(EvidenceRow { index, tracker_display: row.tracker_display, candidate_id: row.candidate_id }),
        Err(BoardError::NotFound(_)) => Err(Verdict::TrackerNotOnBoard),
        Err(BoardError::DuplicateTracker { first, second, .. }) => Err(Verdict::DuplicateTracker { first, second }),
        Err(e) => Err(Verdict::MalformedBoard { reason: e.to_string() }),
    }
}

fn row_verdict(row: &EvidenceRow, cast_choice: Option<&str>) -> Verdict {
    match cast_choice {
        None => Verdict::Located,
        Some(c) if c == row.candidate_id => Verdict::Match,
        Some(_) => Verdict::Mismatch,
    }
}

/// Inputs to [`assess`], as fetched from the server.
pub struct Fetched<'a> {
    pub election_id: &'a str,
    pub voter_id: &'a str,
    pub group: GroupProfile,
    pub alpha_shares: Vec<AlphaShare>,
    pub beta: GroupElement,
    pub board: Vec<BulletinEntry>,
}

/// Opens the commitment, checks the board and records everything.
/// Later checks still run after an earlier one fails so the evidence keeps
/// as much as can be determined; the verdict reports the first failure.
pub fn assess<R: RngCore + CryptoRng>(
    fetched: Fetched<'_>,
    trapdoor: &SecretKey,
    cast_choice: Option<&str>,
    rng: &mut R,
) -> Evidence {
    let ctx = GroupCtx::from_profile(fetched.group);
    let alpha = assemble_alpha(&ctx, &fetched.alpha_shares);
    let chain = verify_chain(&fetched.board);
    let decoded = decode(&fetched.board, fetched.voter_id);

    let mut failures = board_failures(chain, &decoded, &fetched.beta);
    let tracker = decoded.election.as_ref().and_then(|e| {
        TrackerTable::new(&ctx, e.tracker_pool.iter().copied())
            .and_then(|table| open_commitment(&ctx, &fetched.beta, &alpha, trapdoor, &table))
            .ok()
    });
    if tracker.is_none() && decoded.election.is_some() {
        failures.push(Verdict::CommitmentNotOpened);
    }

    let mut row = None;
    let mut opening_proof = None;
    if let Some(t) = tracker {
        let ct = Ciphertext { alpha: alpha.clone(), beta: fetched.beta.clone() };
        let claimed = encode_tracker(&ctx, t).expect("pool trackers encode");
        opening_proof = Some(prove_decryption(&ctx, trapdoor, &ct, &claimed, rng));
        match locate(&fetched.board, &t.display()) {
            Ok(r) => row = Some(r),
            Err(v) => failures.push(v),
        }
    }

    let verdict = failures
        .into_iter()
        .next()
        .unwrap_or_else(|| row_verdict(row.as_ref().expect("located"), cast_choice));

    Evidence {
        format: EVIDENCE_FORMAT.to_owned(),
        election_id: fetched.election_id.to_owned(),
        voter_id: fetched.voter_id.to_owned(),
        group: fetched.group,
        beta: fetched.beta,
        alpha_shares: fetched.alpha_shares,
        alpha,
        tracker_display: tracker.map(|t| t.display()),
        opening_proof,
        cast_choice: cast_choice.map(str::to_owned),
        row,
        verdict,
        board: fetched.board,
    }
}

impl Evidence {
    /// The session-level result: an outcome, or the failure as an error.
    pub fn outcome(&self) -> Result<VerificationOutcome> {
        let tracker = || self.tracker_display.clone().unwrap_or_default();
        match &self.verdict {
            Verdict::Match | Verdict::Mismatch | Verdict::Located => {
                let row = self.row.as_ref().expect("row verdicts carry a row");
                Ok(VerificationOutcome {
                    tracker_display: row.tracker_display.clone(),
                    row_index: row.index,
                    row_candidate: row.candidate_id.clone(),
                    chain_ok: true,
                    matched: self.cast_choice.as_ref().map(|c| *c == row.candidate_id),
                })
            }
            Verdict::ChainBroken { first_bad_index } => Err(ClientError::ChainBroken { first_bad_index: *first_bad_index }),
            Verdict::TrackerNotOnBoard => Err(ClientError::TrackerNotOnBoard { tracker: tracker() }),
            Verdict::DuplicateTracker { first, second } => {
                Err(ClientError::DuplicateTracker { tracker: tracker(), first: *first, second: *second })
            }
            Verdict::CommitmentNotOpened => Err(ClientError::CommitmentNotOpened),
            Verdict::BetaMismatch => Err(ClientError::BetaMismatch),
            Verdict::MalformedBoard { reason } => Err(ClientError::MalformedBoard(reason.clone())),
        }
    }

    /// Pretty JSON with a trailing newline. [`Evidence::from_json`] followed
    /// by this reproduces the input byte for byte.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("evidence serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ev: Evidence = serde_json::from_str(text).map_err(|e| ClientError::Evidence(e.to_string()))?;
        if ev.format != EVIDENCE_FORMAT {
            return Err(ClientError::Evidence(format!("unsupported format `{}`", ev.format)));
        }
        Ok(ev)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Result of re-checking an evidence file without secrets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub chain: ChainVerdict,
    /// `alpha` is the product of `alpha_shares`, all issued for this voter.
    pub shares_consistent: bool,
    /// The voter row on the board carries the recorded `β`.
    pub beta_on_board: bool,
    /// `None` when the file has no tracker to check.
    pub opening_proof_valid: Option<bool>,
    pub recomputed: Verdict,
    /// All checks hold and the recomputed verdict equals the recorded one.
    pub consistent: bool,
}

pub fn audit(ev: &Evidence) -> AuditReport {
    let ctx = GroupCtx::from_profile(ev.group);
    let chain = verify_chain(&ev.board);
    let decoded = decode(&ev.board, &ev.voter_id);
    let shares_consistent = assemble_alpha(&ctx, &ev.alpha_shares) == ev.alpha
        && ev.alpha_shares.iter().all(|s| s.voter_id == ev.voter_id);
    let beta_on_board = decoded.voter.as_ref().is_some_and(|v| v.beta == ev.beta);

    let tracker = ev.tracker_display.as_deref().and_then(|d| parse_tracker_display(d).ok());
    let in_pool = match (&decoded.election, tracker) {
        (Some(e), Some(t)) => e.tracker_pool.contains(&t),
        _ => false,
    };
    let opening_proof_valid = ev.tracker_display.as_ref().map(|_| {
        match (tracker, &ev.opening_proof, &decoded.voter) {
            (Some(t), Some(proof), Some(voter)) if in_pool => {
                let ct = Ciphertext { alpha: ev.alpha.clone(), beta: ev.beta.clone() };
                encode_tracker(&ctx, t).is_ok_and(|m| verify_decryption(&ctx, &voter.trapdoor_pk, &ct, &m, proof))
            }
            _ => false,
        }
    });

    let mut failures = board_failures(chain, &decoded, &ev.beta);
    if decoded.election.is_some() && tracker.is_none() {
        failures.push(Verdict::CommitmentNotOpened);
    }
    let mut row = None;
    if let Some(t) = tracker {
        match locate(&ev.board, &t.display()) {
            Ok(r) => row = Some(r),
            Err(v) => failures.push(v),
        }
    }
    let recomputed = failures
        .into_iter()
        .next()
        .unwrap_or_else(|| row_verdict(row.as_ref().expect("located"), ev.cast_choice.as_deref()));

    let consistent =
        shares_consistent && opening_proof_valid != Some(false) && recomputed == ev.verdict && row == ev.row;
    AuditReport { chain, shares_consistent, beta_on_board, opening_proof_valid, recomputed, consistent }
}
