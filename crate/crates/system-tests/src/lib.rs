//! Harness for whole-system tests: live servers with provisioned voters, the
//! server binary as a killable child process, a board-rewriting proxy, and
//! an independent small-group arithmetic oracle.

pub mod fixture;
pub mod oracle;
pub mod process;
pub mod tamper;

pub use fixture::{LiveElection, ADMIN};
