use rand::seq::SliceRandom;
use rand::{CryptoRng, RngCore};
use selene_core::api::{Phase, StatusResponse};
use selene_core::board::{verify_chain, BoardRecord, BoardView, BulletinEntry, ChainVerdict, ResultRow};
use selene_core::engine::{ballot_message, CandidateTable, VoterKeys};
use selene_core::{encrypt, fake_alpha, parse_tracker_display, sign, GroupCtx, GroupElement, GroupProfile, SecretKey};
use serde::{Deserialize, Serialize};

use crate::api::ApiClient;
use crate::error::{ClientError, Result};
use crate::evidence::{assess, Evidence, Fetched, VerificationOutcome};
use crate::keyfile::KeyFile;
use crate::transport::Transport;
use crate::workflow::{Position, Workflow};

/// The secrets a session works with. Verification alone needs only the
/// trapdoor key.
#[derive(Debug, Clone)]
pub struct SessionKeys {
    pub group: GroupProfile,
    pub trapdoor: SecretKey,
    pub signing: Option<SecretKey>,
}

impl SessionKeys {
    pub fn from_voter_keys(group: GroupProfile, keys: &VoterKeys) -> Self {
        SessionKeys { group, trapdoor: keys.trapdoor.clone(), signing: Some(keys.signing.clone()) }
    }

    pub fn verify_only(&self) -> Self {
        SessionKeys { signing: None, ..self.clone() }
    }
}

impl From<KeyFile> for SessionKeys {
    fn from(kf: KeyFile) -> Self {
        SessionKeys { group: kf.group, trapdoor: kf.trapdoor, signing: kf.signing }
    }
}

/// A locally retained plaintext choice. Holding one is a receipt, so
/// sessions only keep it when asked to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CastRecord {
    pub election_id: String,
    pub voter_id: String,
    pub candidate_id: String,
    pub board_index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardSnapshot {
    pub entries: Vec<BulletinEntry>,
    pub chain: ChainVerdict,
}

impl BoardSnapshot {
    pub fn new(entries: Vec<BulletinEntry>) -> Self {
        let chain = verify_chain(&entries);
        BoardSnapshot { entries, chain }
    }

    /// Result rows that parse, with their board indices.
    pub fn result_rows(&self) -> Vec<(u64, ResultRow)> {
        self.entries
            .iter()
            .filter_map(|e| match e.record() {
                Ok(BoardRecord::Result(r)) => Some((e.index, r)),
                _ => None,
            })
            .collect()
    }

    pub fn view(&self) -> Result<BoardView> {
        BoardView::from_entries(&self.entries).map_err(|e| ClientError::MalformedBoard(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FakeTracker {
    pub tracker_display: String,
    pub row_index: u64,
    /// `α'` such that the voter's `β` opens to `tracker_display`.
    pub alpha: GroupElement,
    pub beta: GroupElement,
}

pub struct ClientSession<T> {
    api: ApiClient<T>,
    token: String,
    keys: SessionKeys,
    ctx: GroupCtx,
    status: StatusResponse,
    workflow: Workflow,
    retain_choice: bool,
    selection: Option<String>,
    ballot_index: Option<u64>,
    cast_record: Option<CastRecord>,
    last_evidence: Option<Evidence>,
}

impl<T: Transport> ClientSession<T> {
    /// `POST /api/auth` then `GET /api/status`; lands on the entry screen.
    pub async fn login(transport: T, voter_id: &str, credential: &str, keys: SessionKeys) -> Result<Self> {
        let api = ApiClient::new(transport);
        let token = api.auth(voter_id, credential).await?.token;
        let status = api.status(&token).await?;
        if status.group != keys.group {
            return Err(ClientError::KeyGroupMismatch {
                keyfile: keys.group.to_string(),
                election: status.group.to_string(),
            });
        }
        let mut workflow = Workflow::default();
        workflow.enter(status.phase, status.has_voted);
        Ok(ClientSession {
            api,
            token,
            ctx: GroupCtx::from_profile(keys.group),
            keys,
            status,
            workflow,
            retain_choice: false,
            selection: None,
            ballot_index: None,
            cast_record: None,
            last_evidence: None,
        })
    }

    pub fn api(&self) -> &ApiClient<T> {
        &self.api
    }

    pub fn transport(&self) -> &T {
        self.api.transport()
    }

    pub fn voter_id(&self) -> &str {
        &self.status.voter_id
    }

    pub fn status(&self) -> &StatusResponse {
        &self.status
    }

    pub fn position(&self) -> Position {
        self.workflow.position()
    }

    pub fn workflow(&self) -> &Workflow {
        &self.workflow
    }

    /// Keep the plaintext choice after casting so verification can report
    /// `matched`. Off by default.
    pub fn set_retain_choice(&mut self, retain: bool) {
        self.retain_choice = retain;
    }

    pub fn cast_record(&self) -> Option<&CastRecord> {
        self.cast_record.as_ref()
    }

    /// Loads a record kept by an earlier session or device.
    pub fn set_cast_record(&mut self, record: Option<CastRecord>) {
        self.cast_record = record;
    }

    pub fn ballot_index(&self) -> Option<u64> {
        self.ballot_index
    }

    pub fn last_evidence(&self) -> Option<&Evidence> {
        self.last_evidence.as_ref()
    }

    pub async fn refresh_status(&mut self) -> Result<&StatusResponse> {
        self.status = self.api.status(&self.token).await?;
        Ok(&self.status)
    }

    pub fn forward(&mut self) -> Result<Position> {
        self.workflow.forward()
    }

    pub fn back(&mut self) -> Result<Position> {
        self.workflow.back()
    }

    /// Picks a candidate on the selection screen and moves to confirmation.
    pub fn select(&mut self, candidate_id: &str) -> Result<()> {
        if !self.status.candidates.iter().any(|c| c.id == candidate_id) {
            return Err(ClientError::UnknownCandidate(candidate_id.to_owned()));
        }
        if self.position() == Position::Confirm {
            self.workflow.back()?;
        }
        self.workflow.advance_to(Position::Select)?;
        self.selection = Some(candidate_id.to_owned());
        self.workflow.forward()?;
        Ok(())
    }

    fn require_phase(&self, ok: impl Fn(Phase) -> bool, needs: &'static str) -> Result<()> {
        if ok(self.status.phase) {
            Ok(())
        } else {
            Err(ClientError::WrongPhase { phase: self.status.phase, needs })
        }
    }

    /// Encrypts, signs and submits a ballot, then checks the board shows it.
    ///
    /// The phase check uses the cached status and sends nothing on failure.
    /// From the voting screens this walks Select and Confirm before Cast; a
    /// session that entered as already-voted submits directly so the
    /// server's `AlreadyVoted` comes back unchanged.
    pub async fn cast_vote<R: RngCore + CryptoRng>(&mut self, candidate_id: &str, rng: &mut R) -> Result<u64> {
        self.require_phase(|p| p == Phase::Vote, "vote")?;
        let signing = self.keys.signing.clone().ok_or(ClientError::MissingSigningKey)?;
        let plaintext = CandidateTable::new(&self.ctx, &self.status.candidates)
            .encode(candidate_id)
            .cloned()
            .ok_or_else(|| ClientError::UnknownCandidate(candidate_id.to_owned()))?;

        let in_flow = matches!(self.position(), Position::Instructions | Position::Select | Position::Confirm);
        let confirmed_already = self.position() == Position::Confirm && self.selection.as_deref() == Some(candidate_id);
        if in_flow && !confirmed_already {
            self.select(candidate_id)?;
        }

        let r = self.ctx.random_nonzero_scalar(rng);
        let enc_vote = encrypt(&self.ctx, &self.status.election_pk, &plaintext, &r)
            .map_err(|e| ClientError::Protocol { status: 200, detail: format!("election key: {e}") })?;
        let message = ballot_message(&self.status.election_id, &self.status.voter_id, &enc_vote);
        let sig = sign(&self.ctx, &signing, &message, rng);
        let index = self.api.submit_ballot(&self.token, enc_vote.clone(), sig).await?.index;
        if in_flow {
            self.workflow.forward()?;
        }

        let shown = self.api.board_range(index, index + 1).await?;
        let confirmed = shown.entries.first().and_then(|e| e.record().ok()).is_some_and(|r| {
            matches!(r, BoardRecord::Ballot(b) if b.voter_id == self.status.voter_id && b.enc_vote == enc_vote)
        });
        if !confirmed {
            return Err(ClientError::BallotNotConfirmed(index));
        }

        self.status.has_voted = true;
        self.ballot_index = Some(index);
        self.cast_record = self.retain_choice.then(|| CastRecord {
            election_id: self.status.election_id.clone(),
            voter_id: self.status.voter_id.clone(),
            candidate_id: candidate_id.to_owned(),
            board_index: index,
        });
        self.selection = None;
        if in_flow {
            self.workflow.forward()?;
        }
        Ok(index)
    }

    /// The one-button check. Read-only: `GET /api/status`, `GET /api/alpha`,
    /// `GET /api/board`. Needs the Q&A screen to have been reached.
    pub async fn verify_vote(&mut self) -> Result<VerificationOutcome> {
        self.refresh_status().await?;
        self.require_phase(|p| p == Phase::Verify, "verify")?;
        if self.position() == Position::Done {
            self.workflow.forward()?;
        }
        if !matches!(self.position(), Position::QnA | Position::Verified) {
            return Err(ClientError::Navigation { from: self.position(), to: Position::Verified });
        }

        let alpha = self.api.alpha(&self.token).await?;
        let board = self.api.board().await?;
        let cast_choice = self
            .cast_record
            .as_ref()
            .filter(|r| r.voter_id == self.status.voter_id && r.election_id == self.status.election_id)
            .map(|r| r.candidate_id.clone());
        let evidence = assess(
            Fetched {
                election_id: &self.status.election_id,
                voter_id: &self.status.voter_id,
                group: self.keys.group,
                alpha_shares: alpha.shares,
                beta: alpha.beta,
                board,
            },
            &self.keys.trapdoor,
            cast_choice.as_deref(),
            &mut rand::rngs::OsRng,
        );
        let outcome = evidence.outcome();
        self.last_evidence = Some(evidence);
        let outcome = outcome?;
        if self.position() == Position::QnA {
            self.workflow.forward()?;
        }
        Ok(outcome)
    }

    /// Writes the evidence from the last verification attempt.
    pub fn export_evidence(&self, path: &std::path::Path) -> Result<&Evidence> {
        let ev = self
            .last_evidence
            .as_ref()
            .ok_or_else(|| ClientError::Evidence("no verification has been attempted".into()))?;
        ev.save(path)?;
        Ok(ev)
    }

    /// `GET /api/status` then `GET /api/board`. No tracker is involved.
    pub async fn browse_board(&mut self) -> Result<BoardSnapshot> {
        self.refresh_status().await?;
        self.require_phase(Phase::results_visible, "published or verify")?;
        Ok(BoardSnapshot::new(self.api.board().await?))
    }

    /// Picks a published row for `coerced_candidate` uniformly at random and
    /// computes an `α'` that opens this voter's `β` to it. Sends exactly what
    /// [`ClientSession::browse_board`] sends.
    pub async fn fake_tracker<R: RngCore + CryptoRng>(
        &mut self,
        coerced_candidate: &str,
        rng: &mut R,
    ) -> Result<FakeTracker> {
        let snapshot = self.browse_board().await?;
        let rows: Vec<(u64, ResultRow)> =
            snapshot.result_rows().into_iter().filter(|(_, r)| r.candidate_id == coerced_candidate).collect();
        let (row_index, row) =
            rows.choose(rng).cloned().ok_or_else(|| ClientError::NoSuchCandidateRow(coerced_candidate.to_owned()))?;
        let beta = snapshot
            .entries
            .iter()
            .find_map(|e| match e.record() {
                Ok(BoardRecord::Voter(v)) if v.voter_id == self.status.voter_id => Some(v.beta),
                _ => None,
            })
            .ok_or_else(|| ClientError::MalformedBoard("no setup row for this voter".into()))?;
        let tracker = parse_tracker_display(&row.tracker_display)
            .map_err(|e| ClientError::MalformedBoard(format!("row {row_index}: {e}")))?;
        let alpha = fake_alpha(&self.ctx, &beta, tracker, &self.keys.trapdoor)
            .map_err(|e| ClientError::MalformedBoard(format!("row {row_index}: {e}")))?;
        Ok(FakeTracker { tracker_display: row.tracker_display, row_index, alpha, beta })
    }
}
