use thiserror::Error;

use crate::latin::Point;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("not a Latin rectangle: {0}")]
    NotLatin(String),

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("rectangles are not orthogonal ({violations} repeated pairs)")]
    NotOrthogonal { violations: usize },

    #[error("row {row} is already coloured at time {time}")]
    RowAlreadyColoured { row: usize, time: usize },

    #[error("degenerate survival probability {denominator:e} at point {point:?}")]
    DegenerateDenominator { point: Point, denominator: f64 },

    #[error("symbol {sym} has no mass on row {row}")]
    DeadSymbol { row: usize, sym: usize },

    #[error("brute-force cut check limited to n <= {max}, got n = {n}")]
    TooLarge { n: usize, max: usize },

    #[error("no fractional matching: max flow {flow} < {n} at eta = {eta}")]
    Infeasible { n: usize, flow: f64, eta: f64 },

    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),

    #[error("support of the residual matrix has no perfect matching (remaining mass {remaining:e})")]
    NoSupportMatching { remaining: f64 },

    #[error("search node budget of {limit} exceeded")]
    LimitExceeded { limit: u64 },

    #[error("legality graph for row {row} has no perfect matching")]
    NoPerfectMatching { row: usize },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("the process is stopped at time {0}")]
    Stopped(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
