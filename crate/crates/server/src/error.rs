use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
pub use selene_core::api::{ApiError, ErrorCode};
use selene_core::EngineError;

pub fn status_of(code: ErrorCode) -> StatusCode {
    use ErrorCode::*;
    match code {
        BadCredential | InvalidToken | BadAdminCredential => StatusCode::UNAUTHORIZED,
        WrongPhase | AlreadyVoted | IllegalTransition | AlreadyConfigured | ResultsNotPublished => {
            StatusCode::CONFLICT
        }
        BadSignature | MalformedBallot | InvalidConfig | MalformedRequest => StatusCode::BAD_REQUEST,
        RangeOutOfBounds => StatusCode::RANGE_NOT_SATISFIABLE,
        Internal => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

pub fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(ErrorCode::Internal, e.to_string())
}

pub fn from_engine(e: EngineError) -> ApiError {
    let code = match &e {
        EngineError::AlreadyVoted(_) => ErrorCode::AlreadyVoted,
        EngineError::BadSignature => ErrorCode::BadSignature,
        EngineError::MalformedBallot => ErrorCode::MalformedBallot,
        EngineError::ElectionNotInVotePhase => ErrorCode::WrongPhase,
        EngineError::ResultsNotPublished => ErrorCode::ResultsNotPublished,
        EngineError::InvalidConfig(_)
        | EngineError::DuplicateVoter(_)
        | EngineError::DuplicateCandidate(_)
        | EngineError::PoolTooSmall { .. }
        | EngineError::Crypto(_) => ErrorCode::InvalidConfig,
        _ => ErrorCode::Internal,
    };
    ApiError::new(code, e.to_string())
}

/// Response wrapper so handlers can return `Result<_, Rejection>`.
#[derive(Debug)]
pub struct Rejection(pub ApiError);

impl From<ApiError> for Rejection {
    fn from(e: ApiError) -> Self {
        Rejection(e)
    }
}

impl From<EngineError> for Rejection {
    fn from(e: EngineError) -> Self {
        Rejection(from_engine(e))
    }
}

impl IntoResponse for Rejection {
    fn into_response(self) -> Response {
        if self.0.code == ErrorCode::Internal {
            tracing::error!(message = %self.0.message, "internal error");
        }
        (status_of(self.0.code), Json(self.0)).into_response()
    }
}
