use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::external::ExternalSession;
use crate::gridworld::{GridWorld, GridworldOracle};
use crate::uci::UciSession;
use crate::AgentError;

/// Environment variable holding the default UCI engine path.
pub const ENGINE_ENV: &str = "SARFA_ENGINE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Uci,
    External,
    Gridworld,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchLimit {
    Depth(u32),
    MoveTimeMs(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub kind: OracleKind,
    pub executable_path: Option<PathBuf>,
    #[serde(default)]
    pub args: Vec<String>,
    pub search_limit: SearchLimit,
    pub multipv: u32,
    /// Pawn units per 100 centipawns.
    pub q_scale: f64,
    /// Largest magnitude any Q value can take (a mate in one).
    pub q_cap: f64,
    /// Centipawn scores saturate here; mates lie in `(mate_base, q_cap]`.
    pub mate_base: f64,
    pub handshake_timeout_ms: u64,
    pub eval_timeout_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gridworld: Option<GridWorld>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            kind: OracleKind::Uci,
            executable_path: None,
            args: Vec::new(),
            search_limit: SearchLimit::Depth(12),
            multipv: 10,
            q_scale: 1.0,
            q_cap: 20.0,
            mate_base: 15.0,
            handshake_timeout_ms: 10_000,
            eval_timeout_ms: 300_000,
            gridworld: None,
        }
    }
}

impl OracleConfig {
    pub fn uci(path: impl Into<PathBuf>) -> Self {
        OracleConfig {
            executable_path: Some(path.into()),
            ..Self::default()
        }
    }

    pub fn external(path: impl Into<PathBuf>, args: Vec<String>) -> Self {
        OracleConfig {
            kind: OracleKind::External,
            executable_path: Some(path.into()),
            args,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let err = |m: &str| Err(AgentError::Config(m.to_owned()));
        if self.multipv == 0 {
            return err("multipv must be at least 1");
        }
        match self.search_limit {
            SearchLimit::Depth(0) => return err("search depth must be at least 1"),
            SearchLimit::MoveTimeMs(0) => return err("movetime must be at least 1 ms"),
            _ => {}
        }
        if !(self.q_scale.is_finite() && self.q_scale > 0.0) {
            return err("q_scale must be positive");
        }
        if !(self.mate_base.is_finite() && self.mate_base > 0.0) {
            return err("mate_base must be positive");
        }
        if !(self.q_cap.is_finite() && self.q_cap > self.mate_base) {
            return err("q_cap must exceed mate_base");
        }
        Ok(())
    }
}

pub enum OracleSession {
    Uci(UciSession),
    External(ExternalSession),
    Gridworld(GridworldOracle),
}

/// Starts the agent described by `config`. Subprocess kinds complete their
/// handshake before returning.
pub fn open_session(config: &OracleConfig) -> Result<OracleSession, AgentError> {
    config.validate()?;
    match config.kind {
        OracleKind::Uci => UciSession::open(config).map(OracleSession::Uci),
        OracleKind::External => ExternalSession::open(config).map(OracleSession::External),
        OracleKind::Gridworld => {
            let world = config
                .gridworld
                .clone()
                .ok_or_else(|| AgentError::Config("gridworld oracle needs a world".into()))?;
            Ok(OracleSession::Gridworld(GridworldOracle::new(world)))
        }
    }
}
