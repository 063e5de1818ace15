//! Cryptographic core of a Selene-style verifiable voting system.
//!
//! Voters cast ElGamal-encrypted ballots; each voter also holds a private
//! tracking number committed on the bulletin board as the `β` half of an
//! ElGamal pair whose `α` half is shared between Tellers and released only
//! after the (tracker, vote) pairs are published. The voter opens `β` with
//! their trapdoor key, finds their tracker on the board, and checks the vote
//! next to it. The same trapdoor lets a coerced voter fabricate an `α'` that
//! opens `β` to any other published tracker.
//!
//! Modules, bottom-up:
//! - [`group`], [`encoding`]: subgroup arithmetic and the canonical byte form.
//! - [`elgamal`], [`tracker`], [`schnorr`], [`proof`]: primitives.
//! - [`engine`]: Teller ceremonies (setup, tracker assignment, mix, tally,
//!   α-share release).
//! - [`board`]: the hash-chained bulletin board and its log file format.
//! - [`api`]: JSON bodies exchanged with the election server.

pub mod api;
pub mod board;
pub mod elgamal;
pub mod encoding;
pub mod engine;
pub mod error;
pub mod group;
pub mod proof;
pub mod schnorr;
pub mod tracker;

pub use elgamal::{combine, decrypt, encrypt, keygen, reencrypt, Ciphertext, KeyPair, SecretKey};
pub use error::{CryptoError, EngineError};
pub use group::{GroupCtx, GroupElement, GroupProfile, Scalar};
pub use proof::{prove_decryption, verify_decryption, DecryptionProof};
pub use schnorr::{sign, verify_sig, Signature};
pub use tracker::{
    decode_tracker, encode_tracker, fake_alpha, open_commitment, parse_tracker_display,
    tracker_display, Tracker, TrackerTable,
};
