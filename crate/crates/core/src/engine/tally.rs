use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::config::{Candidate, CandidateTable};
use super::mix::MixBatch;
use super::teller::{combine_shares, read_teller_id, DecryptionShare, TellerState};
use crate::elgamal::Ciphertext;
use crate::encoding::{Canonical, CanonicalReader, CanonicalWriter};
use crate::error::{CryptoError, EngineError};
use crate::group::{GroupCtx, GroupElement};
use crate::tracker::{Tracker, TrackerTable};

/// One Teller's decryption shares for a list of ciphertexts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialDecryptions {
    pub teller_id: u32,
    pub shares: Vec<DecryptionShare>,
}

impl Canonical for PartialDecryptions {
    fn write_canonical(&self, w: &mut CanonicalWriter) {
        w.u64(self.teller_id.into()).put(&self.shares);
    }

    fn read_canonical(r: &mut CanonicalReader<'_>, ctx: &GroupCtx) -> Result<Self, CryptoError> {
        Ok(PartialDecryptions { teller_id: read_teller_id(r)?, shares: r.get(ctx)? })
    }
}

/// Asks every Teller for shares over `cts`; each reply crosses the wire format.
pub(crate) fn collect_partial_decryptions<R: RngCore + CryptoRng>(
    ctx: &GroupCtx,
    cts: &[Ciphertext],
    tellers: &[TellerState],
    rng: &mut R,
) -> Result<Vec<PartialDecryptions>, EngineError> {
    tellers
        .iter()
        .map(|t| {
            let msg = PartialDecryptions {
                teller_id: t.teller_id,
                shares: cts.iter().map(|ct| t.partial_decrypt(ctx, ct, rng)).collect(),
            };
            let received = PartialDecryptions::from_canonical_bytes(&msg.to_canonical_bytes(), ctx)
                .map_err(|e| EngineError::TellerFailure { teller: t.teller_id, reason: e.to_string() })?;
            if received.shares.len() != cts.len() {
                return Err(EngineError::TellerFailure {
                    teller: t.teller_id,
                    reason: "wrong number of shares".into(),
                });
            }
            Ok(received)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TallyPair {
    pub tracker: Tracker,
    pub candidate_id: String,
}

/// Shares and proofs that decrypt one mixed row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDecryption {
    pub tracker_shares: Vec<DecryptionShare>,
    pub vote_shares: Vec<DecryptionShare>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyResult {
    /// Valid pairs, sorted by tracker.
    pub pairs: Vec<TallyPair>,
    pub counts: BTreeMap<String, u64>,
    /// Aligned with the mixed batch.
    pub decryptions: Vec<RowDecryption>,
    /// Mixed-batch indices whose tracker or vote did not decode.
    pub invalid_rows: Vec<usize>,
}

impl TallyResult {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Everything needed to decode a tally.
pub struct TallyContext<'a> {
    pub teller_pks: &'a [GroupElement],
    pub trackers: &'a TrackerTable,
    pub candidates: &'a [Candidate],
}

/// Verifies every share, decrypts every row, decodes trackers and votes and
/// builds the histogram. Rows that fail to decode are reported in
/// `invalid_rows`; a failing proof aborts with the offending Teller.
pub fn combine_tally(
    ctx: &GroupCtx,
    mixed: &MixBatch,
    messages: &[PartialDecryptions],
    tc: &TallyContext<'_>,
) -> Result<TallyResult, EngineError> {
    let n = mixed.rows.len();
    for (j, msg) in messages.iter().enumerate() {
        if msg.teller_id as usize != j || msg.shares.len() != 2 * n {
            return Err(EngineError::TellerFailure {
                teller: j as u32,
                reason: "malformed partial decryption message".into(),
            });
        }
    }
    let candidate_table = CandidateTable::new(ctx, tc.candidates);
    let mut counts: BTreeMap<String, u64> =
        tc.candidates.iter().map(|c| (c.id.clone(), 0)).collect();
    let mut pairs = Vec::with_capacity(n);
    let mut decryptions = Vec::with_capacity(n);
    let mut invalid_rows = Vec::new();
    for (i, row) in mixed.rows.iter().enumerate() {
        let tracker_shares: Vec<_> = messages.iter().map(|m| m.shares[2 * i].clone()).collect();
        let vote_shares: Vec<_> = messages.iter().map(|m| m.shares[2 * i + 1].clone()).collect();
        let tracker_plain = combine_shares(ctx, &row.enc_tracker, &tracker_shares, tc.teller_pks, i)?;
        let vote_plain = combine_shares(ctx, &row.enc_vote, &vote_shares, tc.teller_pks, i)?;
        decryptions.push(RowDecryption { tracker_shares, vote_shares });
        match (tc.trackers.decode(&tracker_plain), candidate_table.decode(&vote_plain)) {
            (Ok(tracker), Ok(candidate)) => {
                *counts.get_mut(candidate).expect("known candidate") += 1;
                pairs.push(TallyPair { tracker, candidate_id: candidate.to_owned() });
            }
            _ => invalid_rows.push(i),
        }
    }
    pairs.sort();
    Ok(TallyResult { pairs, counts, decryptions, invalid_rows })
}

/// Joint decryption of the mixed batch by every Teller. On success each Teller
/// records that results exist, which unlocks α-share release.
pub fn tally<R: RngCore + CryptoRng>(
    ctx: &GroupCtx,
    mixed: &MixBatch,
    tellers: &mut [TellerState],
    tc: &TallyContext<'_>,
    rng: &mut R,
) -> Result<TallyResult, EngineError> {
    let cts: Vec<Ciphertext> = mixed
        .rows
        .iter()
        .flat_map(|r| [r.enc_tracker.clone(), r.enc_vote.clone()])
        .collect();
    let messages = collect_partial_decryptions(ctx, &cts, tellers, rng)?;
    let result = combine_tally(ctx, mixed, &messages, tc)?;
    for t in tellers.iter_mut() {
        t.mark_published();
    }
    Ok(result)
}
