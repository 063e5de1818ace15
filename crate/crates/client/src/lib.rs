//! Voter-side protocol logic for the election server's HTTP API.
//!
//! A [`ClientSession`] logs in, follows the linear screen sequence in
//! [`workflow`], casts an encrypted and signed ballot, and later verifies it:
//! it fetches the α-shares and the board, opens the commitment with the
//! trapdoor key and finds the voter's row. Coerced voters can ask for a fake
//! tracker; that flow issues the same requests as browsing the board.
//!
//! All traffic goes through a [`Transport`], so recording and tampering
//! wrappers slot in for tests.

pub mod api;
pub mod error;
pub mod evidence;
pub mod keyfile;
pub mod session;
pub mod transport;
pub mod workflow;

pub use api::ApiClient;
pub use error::ClientError;
pub use evidence::{audit, AuditReport, Evidence, VerificationOutcome, Verdict};
pub use keyfile::KeyFile;
pub use session::{BoardSnapshot, CastRecord, ClientSession, FakeTracker, SessionKeys};
pub use transport::{HttpTransport, InterceptTransport, RecordingTransport, Request, Response, Transport};
pub use workflow::{Position, Workflow};
