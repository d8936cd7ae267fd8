//! Uniform Q-value access to agents.
//!
//! * [`UciSession`] drives a UCI chess engine in a child process and turns its
//!   MultiPV scores into Q values.
//! * [`ExternalSession`] speaks a small line protocol (`EVAL` / `QVALUES`) with
//!   any agent process, e.g. an Atari policy wrapped in a script.
//! * [`GridworldOracle`] is an exact, in-process agent over deterministic grid
//!   worlds, solved by value iteration.

mod config;
mod error;
pub mod external;
pub mod gridworld;
mod process;
pub mod uci;

pub use config::{open_session, OracleConfig, OracleKind, OracleSession, SearchLimit, ENGINE_ENV};
pub use error::AgentError;
pub use external::{ExternalSession, Reply, Request};
pub use gridworld::{
    compute_grid_saliency, solve_gridworld, Cell, GridAction, GridState, GridWorld, GridworldOracle, QTable,
};
pub use uci::{parse_info_line, score_to_q, EngineScore, InfoScore, ScoreKind, UciSession};
