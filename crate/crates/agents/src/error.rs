use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid oracle configuration: {0}")]
    Config(String),
    #[error("failed to start `{path}`: {source}")]
    Spawn {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no response within {0:?} while waiting for {1}")]
    Timeout(Duration, &'static str),
    #[error("agent process exited unexpectedly")]
    Crashed,
    #[error("broken pipe to agent process: {0}")]
    BrokenPipe(#[source] std::io::Error),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("unparseable info line `{0}`")]
    UnparseableInfo(String),
    #[error("malformed reply `{0}`")]
    MalformedReply(String),
    #[error("agent reported an error: {0}")]
    Remote(String),
    #[error("state has no legal actions")]
    NoLegalMoves,
    #[error("invalid state: {0}")]
    InvalidState(String),
}
