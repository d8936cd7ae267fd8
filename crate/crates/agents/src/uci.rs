//! UCI engine client. Only position evaluation is used: the engine searches
//! the position with MultiPV and each reported line becomes one action's Q
//! value.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use sarfa_chess::Position;
use sarfa_core::{QOracle, QProfile};
use serde::{Deserialize, Serialize};

use crate::config::{OracleConfig, SearchLimit};
use crate::process::LineProcess;
use crate::AgentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Centipawns(i32),
    /// Moves to mate; positive when the side to move mates. Never zero.
    MateIn(i32),
}

/// Score the engine reported for one root move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineScore {
    pub mv: String,
    pub kind: ScoreKind,
}

/// A parsed `info` line that carries a score and a principal variation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoScore {
    pub multipv: u32,
    pub depth: u32,
    pub score: EngineScore,
}

/// Maps an engine score to a Q value in pawn units.
///
/// Centipawns scale linearly and saturate at `±mate_base`. Mates lie strictly
/// beyond that band, at `mate_base + (q_cap - mate_base) / n`, so any forced
/// mate outranks any material score and shorter mates outrank longer ones.
pub fn score_to_q(kind: ScoreKind, config: &OracleConfig) -> f64 {
    match kind {
        ScoreKind::Centipawns(cp) => (cp as f64 / 100.0 * config.q_scale).clamp(-config.mate_base, config.mate_base),
        ScoreKind::MateIn(n) => {
            let magnitude = config.mate_base + (config.q_cap - config.mate_base) / n.unsigned_abs() as f64;
            magnitude.copysign(n as f64)
        }
    }
}

/// Parses an `info` line. Returns `Ok(None)` for lines without a usable
/// exact score and PV (e.g. `info string`, `currmove`, bound scores).
pub fn parse_info_line(line: &str) -> Result<Option<InfoScore>, AgentError> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("info") {
        return Ok(None);
    }
    let bad = || AgentError::UnparseableInfo(line.to_owned());
    let mut multipv = 1;
    let mut depth = None;
    let mut kind = None;
    let mut pv = None;
    let mut bound = false;
    while let Some(tok) = tokens.next() {
        match tok {
            "string" => return Ok(None),
            "depth" => depth = Some(tokens.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?),
            "multipv" => multipv = tokens.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?,
            "score" => {
                let unit = tokens.next().ok_or_else(bad)?;
                let value: i32 = tokens.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                kind = Some(match unit {
                    "cp" => ScoreKind::Centipawns(value),
                    "mate" => ScoreKind::MateIn(value),
                    _ => return Err(bad()),
                });
            }
            "lowerbound" | "upperbound" => bound = true,
            "pv" => {
                pv = Some(tokens.next().ok_or_else(bad)?.to_owned());
                break;
            }
            _ => {}
        }
    }
    match (kind, pv) {
        // `mate 0` is reported for an already mated side and carries no move.
        (Some(ScoreKind::MateIn(0)), _) => Ok(None),
        (Some(kind), Some(mv)) if !bound => Ok(Some(InfoScore {
            multipv,
            depth: depth.unwrap_or(0),
            score: EngineScore { mv, kind },
        })),
        _ => Ok(None),
    }
}

/// A running UCI engine, ready to evaluate positions.
pub struct UciSession {
    process: LineProcess,
    config: OracleConfig,
}

impl UciSession {
    /// Spawns the engine and completes the `uci`/`isready` handshake, pinning
    /// it to one thread and the configured MultiPV.
    pub fn open(config: &OracleConfig) -> Result<Self, AgentError> {
        config.validate()?;
        let path = config
            .executable_path
            .as_deref()
            .ok_or_else(|| AgentError::Config("UCI oracle needs an engine path".into()))?;
        let mut session = UciSession {
            process: LineProcess::spawn(Path::new(path), &config.args)?,
            config: config.clone(),
        };
        let timeout = session.handshake_timeout();
        session.process.send("uci")?;
        session.process.recv_until(timeout, "uciok", |l| l.trim() == "uciok")?;
        session.process.send("setoption name Threads value 1")?;
        session
            .process
            .send(&format!("setoption name MultiPV value {}", config.multipv))?;
        session.sync(timeout)?;
        Ok(session)
    }

    fn handshake_timeout(&self) -> Duration {
        Duration::from_millis(self.config.handshake_timeout_ms)
    }

    fn sync(&mut self, timeout: Duration) -> Result<(), AgentError> {
        self.process.send("isready")?;
        self.process.recv_until(timeout, "readyok", |l| l.trim() == "readyok")?;
        Ok(())
    }

    /// Raw engine scores for the best `multipv` moves, best first.
    pub fn search(&mut self, pos: &Position) -> Result<Vec<EngineScore>, AgentError> {
        let legal = pos.legal_moves();
        if legal.is_empty() {
            return Err(AgentError::NoLegalMoves);
        }
        // Fresh hash per position keeps results independent of call order.
        self.process.send("ucinewgame")?;
        self.sync(self.handshake_timeout())?;
        self.process.send(&format!("position fen {}", pos.to_fen()))?;
        self.process.send(&match self.config.search_limit {
            SearchLimit::Depth(d) => format!("go depth {d}"),
            SearchLimit::MoveTimeMs(t) => format!("go movetime {t}"),
        })?;

        let timeout = Duration::from_millis(self.config.eval_timeout_ms);
        let deadline = Instant::now() + timeout;
        let mut lines: BTreeMap<u32, EngineScore> = BTreeMap::new();
        loop {
            let line = self.process.recv(deadline, timeout, "bestmove")?;
            if line.starts_with("bestmove") {
                break;
            }
            if let Some(info) = parse_info_line(&line)? {
                lines.insert(info.multipv, info.score);
            }
        }
        if lines.is_empty() {
            return Err(AgentError::Protocol("engine returned bestmove without any scored line".into()));
        }

        let limit = (self.config.multipv as usize).min(legal.len());
        let mut out: Vec<EngineScore> = Vec::with_capacity(limit);
        for score in lines.into_values() {
            if pos.parse_move(&score.mv).is_none() {
                return Err(AgentError::Protocol(format!("engine reported illegal move `{}`", score.mv)));
            }
            if out.len() < limit && !out.iter().any(|s| s.mv == score.mv) {
                out.push(score);
            }
        }
        Ok(out)
    }
}

impl QOracle<Position> for UciSession {
    type Error = AgentError;

    fn evaluate(&mut self, pos: &Position) -> Result<QProfile, AgentError> {
        let scores = self.search(pos)?;
        QProfile::new(
            pos.to_fen(),
            scores.into_iter().map(|s| (s.mv, score_to_q(s.kind, &self.config))),
        )
        .map_err(|e| AgentError::Protocol(e.to_string()))
    }
}

impl Drop for UciSession {
    fn drop(&mut self) {
        self.process.shutdown(Some("quit"));
    }
}
