use std::collections::HashMap;
use std::sync::{Mutex, PoisonError, RwLock};
use std::time::{Duration, Instant};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::HeaderMap;
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::RngCore;
use selene_core::api::*;

use crate::error::{internal, Rejection};
use crate::store::Store;
use crate::AppState;

type ApiResult<T> = Result<Json<T>, Rejection>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/auth", post(auth))
        .route("/api/status", get(status))
        .route("/api/ballot", post(ballot))
        .route("/api/board", get(board))
        .route("/api/alpha", get(alpha))
        .route("/api/admin/setup", post(admin_setup))
        .route("/api/admin/transition", post(admin_transition))
        .route("/api/admin/status", get(admin_status))
        .with_state(state)
}

struct Session {
    voter_id: String,
    expires: Instant,
}

/// In-memory bearer tokens; a restart logs everybody out.
pub(crate) struct Sessions {
    ttl: Duration,
    map: Mutex<HashMap<String, Session>>,
}

impl Sessions {
    pub(crate) fn new(ttl: Duration) -> Self {
        Sessions { ttl, map: Mutex::new(HashMap::new()) }
    }

    fn issue(&self, voter_id: &str) -> String {
        let mut raw = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut raw);
        let token = hex::encode(raw);
        let now = Instant::now();
        let mut map = self.map.lock().unwrap_or_else(PoisonError::into_inner);
        map.retain(|_, s| s.expires > now);
        map.insert(token.clone(), Session { voter_id: voter_id.to_owned(), expires: now + self.ttl });
        token
    }

    fn resolve(&self, token: &str) -> Option<String> {
        let map = self.map.lock().unwrap_or_else(PoisonError::into_inner);
        map.get(token).filter(|s| s.expires > Instant::now()).map(|s| s.voter_id.clone())
    }
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(axum::http::header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

fn reject(code: ErrorCode, message: impl Into<String>) -> Rejection {
    Rejection(ApiError::new(code, message))
}

fn voter_of(state: &AppState, headers: &HeaderMap) -> Result<String, Rejection> {
    bearer(headers)
        .and_then(|t| state.inner.sessions.resolve(t))
        .ok_or_else(|| reject(ErrorCode::InvalidToken, "missing, unknown or expired session token"))
}

fn require_admin(state: &AppState, headers: &HeaderMap) -> Result<(), Rejection> {
    match bearer(headers) {
        Some(c) if c == state.inner.admin_credential => Ok(()),
        _ => Err(reject(ErrorCode::BadAdminCredential, "admin credential rejected")),
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, Rejection> {
    payload.map(|Json(v)| v).map_err(|e| reject(ErrorCode::MalformedRequest, e.body_text()))
}

fn read_store(state: &AppState) -> std::sync::RwLockReadGuard<'_, Store> {
    state.inner.store.read().unwrap_or_else(PoisonError::into_inner)
}

/// Runs a mutation on the blocking pool under the writer lock.
async fn write_store<T, F>(state: &AppState, f: F) -> Result<T, Rejection>
where
    T: Send + 'static,
    F: FnOnce(&mut Store) -> Result<T, ApiError> + Send + 'static,
{
    let inner = state.inner.clone();
    tokio::task::spawn_blocking(move || {
        let lock: &RwLock<Store> = &inner.store;
        let mut store = lock.write().unwrap_or_else(PoisonError::into_inner);
        f(&mut store)
    })
    .await
    .map_err(internal)?
    .map_err(Rejection)
}

async fn auth(State(state): State<AppState>, payload: Result<Json<AuthRequest>, JsonRejection>) -> ApiResult<AuthResponse> {
    let req = body(payload)?;
    let ok = read_store(&state).state().check_credential(&req.voter_id, &req.credential);
    if !ok {
        return Err(reject(ErrorCode::BadCredential, "unknown voter or wrong credential"));
    }
    let token = state.inner.sessions.issue(&req.voter_id);
    Ok(Json(AuthResponse { token, expires_in_secs: state.inner.sessions.ttl.as_secs() }))
}

async fn status(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<StatusResponse> {
    let voter_id = voter_of(&state, &headers)?;
    let store = read_store(&state);
    let s = store.state();
    let election = s.election().ok_or_else(|| internal("session without election"))?;
    let bundle = election.bundle();
    Ok(Json(StatusResponse {
        has_voted: s.voter(&voter_id).is_some_and(|v| v.has_voted),
        voter_id,
        election_id: bundle.election_id.clone(),
        phase: s.phase(),
        candidates: bundle.candidates.clone(),
        display_mode: state.inner.config.display_mode,
        group: bundle.group,
        election_pk: bundle.election_pk.clone(),
    }))
}

async fn ballot(
    State(state): State<AppState>,
    headers: HeaderMap,
    payload: Result<Json<BallotRequest>, JsonRejection>,
) -> ApiResult<BallotResponse> {
    let voter_id = voter_of(&state, &headers)?;
    let req = body(payload)?;
    let index = write_store(&state, move |store| store.submit_ballot(&voter_id, req.enc_vote, req.sig)).await?;
    Ok(Json(BallotResponse { index }))
}

async fn board(State(state): State<AppState>, query: Result<Query<BoardQuery>, QueryRejection>) -> ApiResult<BoardResponse> {
    let Query(q) = query.map_err(|e| reject(ErrorCode::MalformedRequest, e.body_text()))?;
    let store = read_store(&state);
    let board = store.state().board();
    let length = board.len() as u64;
    let (from, to) = (q.from.unwrap_or(0), q.to.unwrap_or(length));
    let entries = board
        .range(from, to)
        .ok_or_else(|| reject(ErrorCode::RangeOutOfBounds, format!("range [{from}, {to}) outside board of length {length}")))?
        .to_vec();
    Ok(Json(BoardResponse { length, entries }))
}

async fn alpha(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<AlphaResponse> {
    let voter_id = voter_of(&state, &headers)?;
    Ok(Json(write_store(&state, move |store| store.release_alpha(&voter_id)).await?))
}

async fn admin_setup(
    State(state): State<AppState>,
    headers: HeaderMap,
    payload: Result<Json<SetupRequest>, JsonRejection>,
) -> ApiResult<SetupResponse> {
    require_admin(&state, &headers)?;
    let req = body(payload)?;
    let group = state.inner.config.group;
    Ok(Json(write_store(&state, move |store| store.setup(req.config, group, &mut rand::rngs::OsRng)).await?))
}

async fn admin_transition(
    State(state): State<AppState>,
    headers: HeaderMap,
    payload: Result<Json<TransitionRequest>, JsonRejection>,
) -> ApiResult<TransitionResponse> {
    require_admin(&state, &headers)?;
    let req = body(payload)?;
    let resp = write_store(&state, move |store| store.transition(req.phase, &mut rand::rngs::OsRng)).await?;
    tracing::info!(phase = %resp.phase, board_length = resp.board_length, "phase transition");
    Ok(Json(resp))
}

async fn admin_status(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<AdminStatusResponse> {
    require_admin(&state, &headers)?;
    Ok(Json(read_store(&state).admin_status()))
}
