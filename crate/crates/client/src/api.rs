//! Typed calls over a [`Transport`], one method per server endpoint.

use selene_core::api::*;
use selene_core::board::BulletinEntry;
use selene_core::engine::ElectionConfig;
use selene_core::schnorr::Signature;
use selene_core::Ciphertext;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{ClientError, Result};
use crate::transport::{Request, Transport};

#[derive(Debug, Clone)]
pub struct ApiClient<T> {
    transport: T,
}

fn json_body<B: Serialize>(body: &B) -> Vec<u8> {
    serde_json::to_vec(body).expect("request bodies serialize")
}

impl<T: Transport> ApiClient<T> {
    pub fn new(transport: T) -> Self {
        ApiClient { transport }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    async fn call<R: DeserializeOwned>(&self, request: Request) -> Result<R> {
        let resp = self.transport.send(request).await?;
        if !resp.is_success() {
            return Err(match serde_json::from_slice::<ApiError>(&resp.body) {
                Ok(e) => ClientError::Api(e),
                Err(_) => ClientError::Protocol {
                    status: resp.status,
                    detail: String::from_utf8_lossy(&resp.body).into_owned(),
                },
            });
        }
        serde_json::from_slice(&resp.body)
            .map_err(|e| ClientError::Protocol { status: resp.status, detail: e.to_string() })
    }

    pub async fn auth(&self, voter_id: &str, credential: &str) -> Result<AuthResponse> {
        let body = AuthRequest { voter_id: voter_id.to_owned(), credential: credential.to_owned() };
        self.call(Request::post("/api/auth", json_body(&body))).await
    }

    pub async fn status(&self, token: &str) -> Result<StatusResponse> {
        self.call(Request::get("/api/status").bearer(token)).await
    }

    pub async fn submit_ballot(&self, token: &str, enc_vote: Ciphertext, sig: Signature) -> Result<BallotResponse> {
        let body = BallotRequest { enc_vote, sig };
        self.call(Request::post("/api/ballot", json_body(&body)).bearer(token)).await
    }

    /// The whole board.
    pub async fn board(&self) -> Result<Vec<BulletinEntry>> {
        let resp: BoardResponse = self.call(Request::get("/api/board")).await?;
        Ok(resp.entries)
    }

    pub async fn board_range(&self, from: u64, to: u64) -> Result<BoardResponse> {
        self.call(Request::get(format!("/api/board?from={from}&to={to}"))).await
    }

    pub async fn alpha(&self, token: &str) -> Result<AlphaResponse> {
        self.call(Request::get("/api/alpha").bearer(token)).await
    }

    pub async fn admin_setup(&self, admin: &str, config: ElectionConfig) -> Result<SetupResponse> {
        self.call(Request::post("/api/admin/setup", json_body(&SetupRequest { config })).bearer(admin)).await
    }

    pub async fn admin_transition(&self, admin: &str, phase: Phase) -> Result<TransitionResponse> {
        self.call(Request::post("/api/admin/transition", json_body(&TransitionRequest { phase })).bearer(admin))
            .await
    }

    pub async fn admin_status(&self, admin: &str) -> Result<AdminStatusResponse> {
        self.call(Request::get("/api/admin/status").bearer(admin)).await
    }
}
