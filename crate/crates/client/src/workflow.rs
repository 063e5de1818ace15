//! The voter's linear screen sequence.
//!
//! ```text
//! Login → Instructions → Select → Confirm → Cast → Done → QnA → Verified
//! ```
//!
//! Login dispatches on `(phase, has_voted)`. After that the position only
//! moves one step forward, or one step back where going back cannot undo a
//! submitted ballot.

use selene_core::api::Phase;
use serde::{Deserialize, Serialize};

use crate::error::ClientError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Position {
    Login,
    Instructions,
    Select,
    Confirm,
    Cast,
    Done,
    QnA,
    Verified,
}

impl Position {
    pub const LINE: [Position; 8] = [
        Position::Login,
        Position::Instructions,
        Position::Select,
        Position::Confirm,
        Position::Cast,
        Position::Done,
        Position::QnA,
        Position::Verified,
    ];

    fn rank(self) -> usize {
        Position::LINE.iter().position(|p| *p == self).expect("listed")
    }

    pub fn next(self) -> Option<Position> {
        Position::LINE.get(self.rank() + 1).copied()
    }

    /// The back-step target, if one is allowed from here.
    pub fn back(self) -> Option<Position> {
        match self {
            Position::Select => Some(Position::Instructions),
            Position::Confirm => Some(Position::Select),
            Position::Verified => Some(Position::QnA),
            _ => None,
        }
    }

    /// Where a freshly authenticated voter lands.
    pub fn entry(phase: Phase, has_voted: bool) -> Position {
        match (phase, has_voted) {
            (Phase::Setup, _) => Position::Login,
            (Phase::Vote, false) => Position::Instructions,
            (Phase::Vote, true) | (Phase::Published, _) | (Phase::Closed, _) => Position::Done,
            (Phase::Verify, _) => Position::QnA,
        }
    }
}

/// Current position plus the full path taken, for conformance checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workflow {
    path: Vec<Position>,
}

impl Default for Workflow {
    fn default() -> Self {
        Workflow { path: vec![Position::Login] }
    }
}

impl Workflow {
    pub fn position(&self) -> Position {
        *self.path.last().expect("never empty")
    }

    pub fn path(&self) -> &[Position] {
        &self.path
    }

    /// Leaves `Login` for the entry screen. A no-op anywhere else.
    pub fn enter(&mut self, phase: Phase, has_voted: bool) {
        if self.position() == Position::Login {
            let to = Position::entry(phase, has_voted);
            if to != Position::Login {
                self.path.push(to);
            }
        }
    }

    pub fn forward(&mut self) -> Result<Position, ClientError> {
        let from = self.position();
        let to = from.next().ok_or(ClientError::Navigation { from, to: from })?;
        if from == Position::Login {
            return Err(ClientError::Navigation { from, to });
        }
        self.path.push(to);
        Ok(to)
    }

    pub fn back(&mut self) -> Result<Position, ClientError> {
        let from = self.position();
        let to = from.back().ok_or(ClientError::Navigation { from, to: from })?;
        self.path.push(to);
        Ok(to)
    }

    /// Steps forward until `target`, failing if it lies behind.
    pub fn advance_to(&mut self, target: Position) -> Result<(), ClientError> {
        let from = self.position();
        if target < from {
            return Err(ClientError::Navigation { from, to: target });
        }
        while self.position() != target {
            self.forward()?;
        }
        Ok(())
    }

    /// True when every move in `path` is a legal dispatch, step or back-step.
    pub fn is_conformant(path: &[Position]) -> bool {
        path.first() == Some(&Position::Login)
            && path.windows(2).enumerate().all(|(i, w)| {
                let (a, b) = (w[0], w[1]);
                let dispatch = i == 0 && a == Position::Login && Phase::ALL
                    .iter()
                    .flat_map(|p| [Position::entry(*p, false), Position::entry(*p, true)])
                    .any(|e| e == b);
                dispatch || a.next() == Some(b) || a.back() == Some(b)
            })
    }
}
