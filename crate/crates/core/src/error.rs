use std::fmt;

use thiserror::Error;

/// Startup assumptions the protocol relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// The boundary between the last and first robot is pinned at `L`.
    A1,
    /// At least two robots start with different orientations.
    A2,
    /// Initial communication zones are pairwise disjoint.
    A3,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::A1 => "A1",
            Assumption::A2 => "A2",
            Assumption::A3 => "A3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("task set is empty")]
    EmptyTaskSet,
    #[error("duplicate task id {0}")]
    DuplicateTaskId(u64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("position {position} outside [0, {length}]")]
    OutOfRange { position: f64, length: f64 },
    #[error("invalid robot {id}: {reason}")]
    InvalidRobot { id: u32, reason: String },
    #[error("fleet needs at least two robots, got {0}")]
    TooFewRobots(usize),
    #[error("cycle of length {length} is statically coverable (2 * sum of radii = {coverage})")]
    StaticallyCoverable { length: f64, coverage: f64 },
    #[error("{which} violated: {detail}")]
    AssumptionViolated { which: Assumption, detail: String },
    #[error("unknown robot id {0}")]
    UnknownRobot(u32),
    #[error("deadlock at t = {time}: no future event")]
    Deadlock { time: f64 },
    #[error("fleet not converged: max relative deviation {deviation:e} > {tolerance:e}")]
    NotConverged { deviation: f64, tolerance: f64 },
    #[error("orientation word has no balanced pair (n_bal = 0)")]
    NoBalancedPair,
    #[error("invalid orientation word: {0}")]
    InvalidWord(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
