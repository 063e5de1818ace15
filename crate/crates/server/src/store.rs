//! Event-sourced election state.
//!
//! `events.log` is the source of truth: one JSON object per line, appended and
//! synced before the change takes effect. It holds Teller secrets and
//! credential hashes and must stay private. `board.log` is the public board,
//! derived from the events; on startup the events are replayed and the board
//! file must be a prefix of the replayed board (a crash between the two writes
//! leaves it one step behind, which is repaired).

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::{CryptoRng, Rng, RngCore};
use selene_core::api::{
    AdminStatusResponse, AlphaResponse, ApiError, ErrorCode, Phase, SetupResponse, TransitionResponse,
};
use selene_core::board::{BallotRecordRow, BoardRecord, BulletinBoard, BulletinEntry, EntryKind};
use selene_core::engine::{Election, ElectionConfig, TallyOutcome};
use selene_core::{Ciphertext, GroupProfile, Signature};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{from_engine, internal};

pub const EVENTS_FILE: &str = "events.log";
pub const BOARD_FILE: &str = "board.log";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("events.log line {line}: {reason}")]
    CorruptEvent { line: usize, reason: String },
    #[error("event {seq} cannot be applied: {reason}")]
    Replay { seq: u64, reason: String },
    #[error(transparent)]
    Board(#[from] selene_core::board::BoardError),
    #[error("board.log diverges from the event log at entry {0}")]
    BoardDiverges(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialRecord {
    pub voter_id: String,
    pub salt: String,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Setup {
        election: Box<Election>,
        credentials: Vec<CredentialRecord>,
    },
    Transition {
        to: Phase,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tally: Option<Box<TallyOutcome>>,
    },
    Ballot {
        voter_id: String,
        enc_vote: Ciphertext,
        sig: Signature,
    },
    /// Audit record: α-shares were served with the board at this length.
    AlphaReleased {
        voter_id: String,
        board_length: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub seq: u64,
    pub event: Event,
}

/// Reads every complete line of `events.log`, truncating a torn tail.
pub fn read_events(path: &Path) -> Result<Vec<LoggedEvent>, StoreError> {
    let raw = match std::fs::read(path) {
        Ok(raw) => raw,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let valid_len = raw.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if valid_len != raw.len() {
        OpenOptions::new().write(true).open(path)?.set_len(valid_len as u64)?;
    }
    let mut out = Vec::new();
    for (line, bytes) in raw[..valid_len].split(|&b| b == b'\n').enumerate() {
        if bytes.is_empty() {
            continue;
        }
        let ev: LoggedEvent = serde_json::from_slice(bytes)
            .map_err(|e| StoreError::CorruptEvent { line, reason: e.to_string() })?;
        if ev.seq != out.len() as u64 {
            return Err(StoreError::CorruptEvent { line, reason: format!("expected seq {}", out.len()) });
        }
        out.push(ev);
    }
    Ok(out)
}

struct EventLog {
    file: File,
    next_seq: u64,
}

impl EventLog {
    fn append(&mut self, event: &Event) -> Result<LoggedEvent, StoreError> {
        let logged = LoggedEvent { seq: self.next_seq, event: event.clone() };
        let mut line = serde_json::to_vec(&logged).map_err(io::Error::other)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.next_seq += 1;
        Ok(logged)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterRecord {
    pub voter_id: String,
    pub salt: String,
    pub credential_hash: String,
    pub has_voted: bool,
}

const CREDENTIAL_ALPHABET: &[u8] = b"ABCDEFGHJKMNPQRSTVWXYZ23456789";
pub const CREDENTIAL_LEN: usize = 12;

pub fn generate_credential<R: RngCore + CryptoRng>(rng: &mut R) -> String {
    (0..CREDENTIAL_LEN)
        .map(|_| CREDENTIAL_ALPHABET[rng.gen_range(0..CREDENTIAL_ALPHABET.len())] as char)
        .collect()
}

pub fn hash_credential(salt_hex: &str, credential: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt_hex.as_bytes());
    h.update([0]);
    h.update(credential.as_bytes());
    hex::encode(h.finalize())
}

/// Phase machine, roster flags and the board, rebuilt deterministically from events.
#[derive(Debug)]
pub struct ElectionState {
    phase: Phase,
    election: Option<Election>,
    voters: BTreeMap<String, VoterRecord>,
    board: BulletinBoard,
    alpha_releases: u64,
}

impl ElectionState {
    fn new(board: BulletinBoard) -> Self {
        ElectionState { phase: Phase::Setup, election: None, voters: BTreeMap::new(), board, alpha_releases: 0 }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn election(&self) -> Option<&Election> {
        self.election.as_ref()
    }

    pub fn voters(&self) -> &BTreeMap<String, VoterRecord> {
        &self.voters
    }

    pub fn voter(&self, voter_id: &str) -> Option<&VoterRecord> {
        self.voters.get(voter_id)
    }

    pub fn board(&self) -> &BulletinBoard {
        &self.board
    }

    pub fn alpha_releases(&self) -> u64 {
        self.alpha_releases
    }

    pub fn has_results(&self) -> bool {
        self.board.entries().iter().any(|e| e.kind == EntryKind::Result)
    }

    /// Uniform answer for unknown voters and wrong credentials.
    pub fn check_credential(&self, voter_id: &str, credential: &str) -> bool {
        match self.voters.get(voter_id) {
            Some(v) => hash_credential(&v.salt, credential) == v.credential_hash,
            None => {
                let _ = hash_credential("00000000000000000000000000000000", credential);
                false
            }
        }
    }

    fn apply(&mut self, event: &Event) -> Result<(), String> {
        match event {
            Event::Setup { election, credentials } => {
                if self.phase != Phase::Setup || self.election.is_some() {
                    return Err("election already configured".into());
                }
                for c in credentials {
                    self.voters.insert(
                        c.voter_id.clone(),
                        VoterRecord {
                            voter_id: c.voter_id.clone(),
                            salt: c.salt.clone(),
                            credential_hash: c.hash.clone(),
                            has_voted: false,
                        },
                    );
                }
                for record in BoardRecord::setup_records(election.bundle()) {
                    self.board.append_record(&record).map_err(|e| e.to_string())?;
                }
                self.election = Some((**election).clone());
            }
            Event::Transition { to, tally } => {
                if self.phase.next() != Some(*to) {
                    return Err(format!("illegal transition {} -> {}", self.phase, to));
                }
                let election = self.election.as_mut().ok_or("no election configured")?;
                match to {
                    Phase::Vote => election.open_voting().map_err(|e| e.to_string())?,
                    Phase::Published => {
                        let outcome = tally.as_ref().ok_or("missing tally outcome")?;
                        election.close_voting().map_err(|e| e.to_string())?;
                        election.record_tally((**outcome).clone()).map_err(|e| e.to_string())?;
                        let published = election.published().expect("just recorded");
                        let passes = published.mix.passes.iter().map(|p| (p.teller_id, p.output.clone()));
                        for record in BoardRecord::publication_records(passes, &published.result) {
                            self.board.append_record(&record).map_err(|e| e.to_string())?;
                        }
                    }
                    Phase::Verify | Phase::Closed | Phase::Setup => {}
                }
                self.phase = *to;
            }
            Event::Ballot { voter_id, enc_vote, sig } => {
                if self.phase != Phase::Vote {
                    return Err("ballot outside vote phase".into());
                }
                let election = self.election.as_mut().ok_or("no election configured")?;
                let accepted = election.accept_ballot(voter_id, enc_vote, sig).map_err(|e| e.to_string())?;
                let setup_row = election.bundle().voter(voter_id).expect("roster voter");
                let row = BallotRecordRow {
                    voter_id: voter_id.clone(),
                    trapdoor_pk: setup_row.trapdoor_pk.clone(),
                    encrypted_tracker: accepted.encrypted_tracker,
                    beta: setup_row.beta.clone(),
                    enc_vote: accepted.enc_vote,
                    signature: accepted.signature,
                };
                self.board.append_record(&BoardRecord::Ballot(row)).map_err(|e| e.to_string())?;
                if let Some(v) = self.voters.get_mut(voter_id) {
                    v.has_voted = true;
                }
            }
            Event::AlphaReleased { .. } => self.alpha_releases += 1,
        }
        Ok(())
    }
}

fn err(code: ErrorCode, message: impl Into<String>) -> ApiError {
    ApiError::new(code, message)
}

/// The single serialized writer for one election directory.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    state: ElectionState,
    log: EventLogHandle,
}

struct EventLogHandle(EventLog);

impl std::fmt::Debug for EventLogHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventLog").field("next_seq", &self.0.next_seq).finish()
    }
}

impl Store {
    /// Opens a data directory, replaying `events.log` and reconciling `board.log`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        let events_path = dir.join(EVENTS_FILE);
        let events = read_events(&events_path)?;

        let mut state = ElectionState::new(BulletinBoard::in_memory());
        for ev in &events {
            state.apply(&ev.event).map_err(|reason| StoreError::Replay { seq: ev.seq, reason })?;
        }

        let mut file_board = BulletinBoard::open(dir.join(BOARD_FILE))?;
        let replayed: Vec<BulletinEntry> = state.board.entries().to_vec();
        if file_board.len() > replayed.len() {
            return Err(StoreError::BoardDiverges(replayed.len() as u64));
        }
        if let Some(i) = file_board.entries().iter().zip(&replayed).position(|(a, b)| a != b) {
            return Err(StoreError::BoardDiverges(i as u64));
        }
        for e in &replayed[file_board.len()..] {
            tracing::warn!(index = e.index, "restoring board entry missing from board.log");
            file_board.append(e.kind, e.payload.clone())?;
        }
        state.board = file_board;

        let file = OpenOptions::new().create(true).append(true).open(&events_path)?;
        let log = EventLog { file, next_seq: events.len() as u64 };
        Ok(Store { dir, state, log: EventLogHandle(log) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn state(&self) -> &ElectionState {
        &self.state
    }

    fn commit(&mut self, event: Event) -> Result<(), ApiError> {
        self.log.0.append(&event).map_err(internal)?;
        self.state.apply(&event).map_err(|reason| {
            internal(format!("logged event failed to apply, restart required: {reason}"))
        })
    }

    /// Configures the election and returns fresh credentials for the roster.
    pub fn setup<R: RngCore + CryptoRng>(
        &mut self,
        config: ElectionConfig,
        group: GroupProfile,
        rng: &mut R,
    ) -> Result<SetupResponse, ApiError> {
        if self.state.phase != Phase::Setup {
            return Err(err(ErrorCode::WrongPhase, "setup is only possible in the setup phase"));
        }
        if self.state.election.is_some() {
            return Err(err(ErrorCode::AlreadyConfigured, "election already configured"));
        }
        if config.group_profile != group {
            return Err(err(
                ErrorCode::InvalidConfig,
                format!("server runs the {} group, config asks for {}", group.as_str(), config.group_profile.as_str()),
            ));
        }
        let election = Election::setup(config, rng).map_err(from_engine)?;
        let mut plain = BTreeMap::new();
        let credentials = election
            .config()
            .voter_roster
            .iter()
            .map(|v| {
                let credential = generate_credential(rng);
                let salt = hex::encode(rng.gen::<[u8; 16]>());
                let hash = hash_credential(&salt, &credential);
                plain.insert(v.voter_id.clone(), credential);
                CredentialRecord { voter_id: v.voter_id.clone(), salt, hash }
            })
            .collect();
        let election_id = election.config().election_id.clone();
        self.commit(Event::Setup { election: Box::new(election), credentials })?;
        Ok(SetupResponse { election_id, credentials: plain, board_length: self.state.board.len() as u64 })
    }

    pub fn transition<R: RngCore + CryptoRng>(
        &mut self,
        to: Phase,
        rng: &mut R,
    ) -> Result<TransitionResponse, ApiError> {
        let from = self.state.phase;
        if from.next() != Some(to) {
            return Err(err(ErrorCode::IllegalTransition, format!("cannot go from {from} to {to}")));
        }
        let election = self
            .state
            .election
            .as_ref()
            .ok_or_else(|| err(ErrorCode::IllegalTransition, "no election configured"))?;
        let tally = if to == Phase::Published {
            let mut closed = election.clone();
            closed.close_voting().map_err(from_engine)?;
            Some(Box::new(closed.compute_tally(rng).map_err(from_engine)?))
        } else {
            None
        };
        self.commit(Event::Transition { to, tally })?;
        Ok(TransitionResponse { phase: to, board_length: self.state.board.len() as u64 })
    }

    /// Accepts a ballot and returns the index of its board row.
    pub fn submit_ballot(
        &mut self,
        voter_id: &str,
        enc_vote: Ciphertext,
        sig: Signature,
    ) -> Result<u64, ApiError> {
        if self.state.phase != Phase::Vote {
            return Err(err(ErrorCode::WrongPhase, format!("ballots are not accepted in the {} phase", self.state.phase)));
        }
        let election = self.state.election.as_ref().ok_or_else(|| internal("vote phase without election"))?;
        election.check_ballot(voter_id, &enc_vote, &sig).map_err(from_engine)?;
        self.commit(Event::Ballot { voter_id: voter_id.to_owned(), enc_vote, sig })?;
        Ok(self.state.board.len() as u64 - 1)
    }

    pub fn release_alpha(&mut self, voter_id: &str) -> Result<AlphaResponse, ApiError> {
        if self.state.phase != Phase::Verify {
            return Err(err(ErrorCode::WrongPhase, format!("α-shares are not served in the {} phase", self.state.phase)));
        }
        if !self.state.has_results() {
            return Err(err(ErrorCode::ResultsNotPublished, "the board carries no results"));
        }
        let election = self.state.election.as_ref().ok_or_else(|| internal("verify phase without election"))?;
        let shares = election.release_alpha(voter_id).map_err(from_engine)?;
        let beta = election
            .assignment(voter_id)
            .map(|a| a.beta.clone())
            .ok_or_else(|| internal("voter without assignment"))?;
        let board_length = self.state.board.len() as u64;
        self.commit(Event::AlphaReleased { voter_id: voter_id.to_owned(), board_length })?;
        Ok(AlphaResponse { voter_id: voter_id.to_owned(), shares, beta })
    }

    pub fn admin_status(&self) -> AdminStatusResponse {
        let election = self.state.election.as_ref();
        AdminStatusResponse {
            phase: self.state.phase,
            election_id: election.map(|e| e.config().election_id.clone()),
            roster_size: self.state.voters.len(),
            ballots_cast: election.map_or(0, |e| e.ballots().len()),
            board_length: self.state.board.len() as u64,
            counts: election.and_then(|e| e.published()).map(|p| p.result.counts.clone()),
        }
    }
}
