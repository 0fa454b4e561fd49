use crate::game::ValidationReport;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid game:\n{0}")]
    InvalidGame(ValidationReport),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown player {0}")]
    UnknownPlayer(usize),
    #[error("unknown infoset `{0}`")]
    UnknownInfoset(String),
    #[error("unknown action {action} at infoset `{infoset}`")]
    UnknownAction { infoset: String, action: usize },
    #[error("node `{0}` is not terminal")]
    NotTerminal(String),
    #[error("node `{0}` is not a chance node")]
    NotChance(String),
    #[error("games are not comparable: {0}")]
    NotComparable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("refinement plan does not match the games: {0}")]
    PlanMismatch(String),
    #[error("expected a single-player game, found {0} players")]
    NotSinglePlayer(usize),
    #[error("{0} exceeds the configured cap; shrink the instance")]
    CapExceeded(String),
    #[error("no equilibrium found at resolution δ = {delta}")]
    NoEquilibrium { delta: f64 },
    #[error("split is not recall-consistent: {0}")]
    NotRecallConsistent(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
