//! A misbehaving server, simulated in front of an honest one.

use std::sync::{Arc, Mutex, PoisonError};

use selene_client::{InterceptTransport, Request, Response, Transport};
use selene_core::api::BoardResponse;
use selene_core::board::{compute_entry_hash, BulletinEntry, GENESIS_HASH};

/// Recomputes every link and hash, as a server rewriting its own history
/// would.
pub fn rechain(entries: &mut [BulletinEntry]) {
    let mut prev = GENESIS_HASH;
    for e in entries.iter_mut() {
        e.prev_hash = prev;
        e.entry_hash = compute_entry_hash(&prev, e.index, e.kind, &e.payload);
        prev = e.entry_hash;
    }
}

/// When set, replaces the entries of every `/api/board` response.
#[derive(Debug, Clone, Default)]
pub struct BoardOverride(Arc<Mutex<Option<Vec<BulletinEntry>>>>);

impl BoardOverride {
    pub fn set(&self, entries: Option<Vec<BulletinEntry>>) {
        *self.0.lock().unwrap_or_else(PoisonError::into_inner) = entries;
    }

    fn get(&self) -> Option<Vec<BulletinEntry>> {
        self.0.lock().unwrap_or_else(PoisonError::into_inner).clone()
    }

    pub fn wrap<T: Transport>(&self, inner: T) -> impl Transport {
        let slot = self.clone();
        InterceptTransport::new(inner, move |req: &Request, resp: Response| {
            match slot.get() {
                Some(entries) if req.path.starts_with("/api/board") && resp.is_success() => {
                    let body = BoardResponse { length: entries.len() as u64, entries };
                    Response { status: resp.status, body: serde_json::to_vec(&body).expect("serializes") }
                }
                _ => resp,
            }
        })
    }
}
