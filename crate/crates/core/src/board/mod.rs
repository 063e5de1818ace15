//! Append-only, hash-chained bulletin board.
//!
//! `entry_hash = SHA-256(prev_hash ∥ index as u64 BE ∥ kind byte ∥ payload)`;
//! the first entry chains from 32 zero bytes. On disk each entry is one line:
//!
//! ```text
//! index \t kind \t payload-hex \t prev_hash-hex \t entry_hash-hex \n
//! ```

mod records;

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use records::{BallotRecordRow, BoardRecord, BoardView, ElectionRecord, ResultRow, VoterRecordRow};

pub const GENESIS_HASH: [u8; 32] = [0; 32];

#[derive(Debug, Error)]
pub enum BoardError {
    #[error("tracker `{0}` not found on the board")]
    NotFound(String),
    #[error("tracker `{tracker}` appears in more than one result row ({first} and {second})")]
    DuplicateTracker { tracker: String, first: u64, second: u64 },
    #[error("board chain is broken at entry {0}")]
    BrokenChain(u64),
    #[error("malformed board line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("malformed {kind} payload at entry {index}: {reason}")]
    Payload { kind: EntryKind, index: u64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Setup,
    Ballot,
    Result,
    Proof,
}

impl EntryKind {
    pub fn code(self) -> u8 {
        match self {
            EntryKind::Setup => 0,
            EntryKind::Ballot => 1,
            EntryKind::Result => 2,
            EntryKind::Proof => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntryKind::Setup => "setup",
            EntryKind::Ballot => "ballot",
            EntryKind::Result => "result",
            EntryKind::Proof => "proof",
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "setup" => Ok(EntryKind::Setup),
            "ballot" => Ok(EntryKind::Ballot),
            "result" => Ok(EntryKind::Result),
            "proof" => Ok(EntryKind::Proof),
            other => Err(format!("unknown entry kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BulletinEntry {
    pub index: u64,
    pub kind: EntryKind,
    #[serde(with = "hex::serde")]
    pub payload: Vec<u8>,
    #[serde(with = "hex::serde")]
    pub prev_hash: [u8; 32],
    #[serde(with = "hex::serde")]
    pub entry_hash: [u8; 32],
}

pub fn compute_entry_hash(prev_hash: &[u8; 32], index: u64, kind: EntryKind, payload: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(prev_hash);
    h.update(index.to_be_bytes());
    h.update([kind.code()]);
    h.update(payload);
    h.finalize().into()
}

impl BulletinEntry {
    pub fn new(index: u64, kind: EntryKind, payload: Vec<u8>, prev_hash: [u8; 32]) -> Self {
        let entry_hash = compute_entry_hash(&prev_hash, index, kind, &payload);
        BulletinEntry { index, kind, payload, prev_hash, entry_hash }
    }

    pub fn to_log_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\n",
            self.index,
            self.kind,
            hex::encode(&self.payload),
            hex::encode(self.prev_hash),
            hex::encode(self.entry_hash)
        )
    }

    /// Parses one line (without its trailing newline).
    pub fn parse_log_line(line: &str, line_no: usize) -> Result<Self, BoardError> {
        let err = |reason: String| BoardError::Parse { line: line_no, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        let [index, kind, payload, prev, hash] = fields.as_slice() else {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        };
        let hash32 = |s: &str| -> Result<[u8; 32], BoardError> {
            let mut out = [0u8; 32];
            hex::decode_to_slice(s, &mut out).map_err(|e| err(e.to_string()))?;
            Ok(out)
        };
        Ok(BulletinEntry {
            index: index.parse().map_err(|e: std::num::ParseIntError| err(e.to_string()))?,
            kind: kind.parse().map_err(err)?,
            payload: hex::decode(payload).map_err(|e| err(e.to_string()))?,
            prev_hash: hash32(prev)?,
            entry_hash: hash32(hash)?,
        })
    }

    pub fn record(&self) -> Result<BoardRecord, BoardError> {
        BoardRecord::decode(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ChainVerdict {
    Valid,
    Broken { first_bad_index: u64 },
}

impl ChainVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, ChainVerdict::Valid)
    }
}

/// Checks dense indices, hash links, and every entry hash.
pub fn verify_chain(entries: &[BulletinEntry]) -> ChainVerdict {
    let mut prev = GENESIS_HASH;
    for (i, e) in entries.iter().enumerate() {
        let i = i as u64;
        let ok = e.index == i
            && e.prev_hash == prev
            && compute_entry_hash(&e.prev_hash, e.index, e.kind, &e.payload) == e.entry_hash;
        if !ok {
            return ChainVerdict::Broken { first_bad_index: i };
        }
        prev = e.entry_hash;
    }
    ChainVerdict::Valid
}

/// The unique result row carrying `tracker_display`, with its board index.
pub fn find_tracker_row(
    entries: &[BulletinEntry],
    tracker_display: &str,
) -> Result<(u64, ResultRow), BoardError> {
    let mut found: Option<(u64, ResultRow)> = None;
    for e in entries.iter().filter(|e| e.kind == EntryKind::Result) {
        let row = ResultRow::from_payload(&e.payload).map_err(|reason| BoardError::Payload {
            kind: e.kind,
            index: e.index,
            reason,
        })?;
        if row.tracker_display != tracker_display {
            continue;
        }
        if let Some((first, _)) = &found {
            return Err(BoardError::DuplicateTracker {
                tracker: tracker_display.to_owned(),
                first: *first,
                second: e.index,
            });
        }
        found = Some((e.index, row));
    }
    found.ok_or_else(|| BoardError::NotFound(tracker_display.to_owned()))
}

/// Board with an optional backing log file. Appends hit the file (flushed and
/// synced) before they become visible in memory.
#[derive(Debug)]
pub struct BulletinBoard {
    entries: Vec<BulletinEntry>,
    log: Option<(PathBuf, File)>,
}

impl Default for BulletinBoard {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl BulletinBoard {
    pub fn in_memory() -> Self {
        BulletinBoard { entries: Vec::new(), log: None }
    }

    /// Opens (or creates) a log file. A torn final line, left by a crash
    /// mid-append, is truncated away; any other damage is an error.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, BoardError> {
        let path = path.as_ref().to_path_buf();
        let raw = match std::fs::read(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        // everything after the last newline is an incomplete append
        let valid_len = raw.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let mut entries = Vec::new();
        for (line_no, line) in raw[..valid_len].split_inclusive(|&b| b == b'\n').enumerate() {
            let line = &line[..line.len() - 1];
            let text = std::str::from_utf8(line)
                .map_err(|e| BoardError::Parse { line: line_no, reason: e.to_string() })?;
            entries.push(BulletinEntry::parse_log_line(text, line_no)?);
        }
        if let ChainVerdict::Broken { first_bad_index } = verify_chain(&entries) {
            return Err(BoardError::BrokenChain(first_bad_index));
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        if raw.len() != valid_len {
            file.set_len(valid_len as u64)?;
        }
        Ok(BulletinBoard { entries, log: Some((path, file)) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.log.as_ref().map(|(p, _)| p.as_path())
    }

    pub fn entries(&self) -> &[BulletinEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tail_hash(&self) -> [u8; 32] {
        self.entries.last().map_or(GENESIS_HASH, |e| e.entry_hash)
    }

    pub fn append(&mut self, kind: EntryKind, payload: Vec<u8>) -> Result<&BulletinEntry, BoardError> {
        let entry = BulletinEntry::new(self.entries.len() as u64, kind, payload, self.tail_hash());
        if let Some((_, file)) = &mut self.log {
            file.write_all(entry.to_log_line().as_bytes())?;
            file.flush()?;
            file.sync_data()?;
        }
        self.entries.push(entry);
        Ok(self.entries.last().expect("just pushed"))
    }

    pub fn append_record(&mut self, record: &BoardRecord) -> Result<&BulletinEntry, BoardError> {
        let (kind, payload) = record.encode();
        self.append(kind, payload)
    }

    /// Entries `[from, to)`.
    pub fn range(&self, from: u64, to: u64) -> Option<&[BulletinEntry]> {
        if from > to || to > self.entries.len() as u64 {
            return None;
        }
        Some(&self.entries[from as usize..to as usize])
    }

    /// Serialized log contents, identical to the file when one is attached.
    pub fn to_log_string(&self) -> String {
        self.entries.iter().map(BulletinEntry::to_log_line).collect()
    }
}
