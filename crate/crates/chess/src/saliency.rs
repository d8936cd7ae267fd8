use std::collections::BTreeMap;

use sarfa_core::{map_with_pool, score_feature, FeatureStatus, Method, QOracle, QProfile, SaliencyError, ScoreBreakdown, SessionPool};
use serde::Serialize;
use thiserror::Error;

use crate::movegen::Move;
use crate::position::Position;
use crate::types::{PieceKind, Square};

/// Per-square saliency for one move. Kings and empty squares have no entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoardSaliency {
    pub fen: String,
    pub selected: String,
    pub method: Method,
    pub original: QProfile,
    pub scores: BTreeMap<Square, ScoreBreakdown>,
}

impl BoardSaliency {
    /// Raw scores keyed by square; skipped squares score 0.
    pub fn score_map(&self) -> BTreeMap<Square, f64> {
        self.scores
            .iter()
            .map(|(sq, b)| (*sq, if b.status.is_skipped() { 0.0 } else { b.score }))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum BoardSaliencyError<E: std::error::Error + 'static> {
    #[error("move `{0}` is not legal in this position")]
    IllegalMove(String),
    #[error("evaluating the unperturbed position failed: {0}")]
    Oracle(#[source] E),
    #[error("the agent reported no value for the explained move `{0}`")]
    SelectedNotEvaluated(String),
    #[error(transparent)]
    Saliency(#[from] SaliencyError),
}

fn prepare<O: QOracle<Position>>(
    pos: &Position,
    selected: Move,
    oracle: &mut O,
) -> Result<QProfile, BoardSaliencyError<O::Error>> {
    if !pos.is_legal(selected) {
        return Err(BoardSaliencyError::IllegalMove(selected.to_string()));
    }
    let original = oracle.evaluate(pos).map_err(BoardSaliencyError::Oracle)?;
    if !original.contains(&selected.to_string()) {
        return Err(BoardSaliencyError::SelectedNotEvaluated(selected.to_string()));
    }
    Ok(original)
}

fn candidate_squares(pos: &Position) -> Vec<Square> {
    pos.occupied()
        .filter(|(_, p)| p.kind != PieceKind::King)
        .map(|(sq, _)| sq)
        .collect()
}

fn score_square<O: QOracle<Position>>(
    pos: &Position,
    sq: Square,
    original: &QProfile,
    selected: &str,
    oracle: &mut O,
    method: Method,
    temperature: f64,
) -> ScoreBreakdown {
    let name = sq.to_string();
    let invalid = || ScoreBreakdown::skipped(name.clone(), FeatureStatus::SkippedInvalidPerturbation);
    let Ok(perturbed) = pos.remove_piece(sq) else {
        return invalid();
    };
    let Ok(q_pert) = oracle.evaluate(&perturbed) else {
        return invalid();
    };
    match score_feature(method, original, &q_pert.with_state_id(name.clone()), selected, temperature) {
        Ok(b) => b,
        Err(_) => invalid(),
    }
}

/// Saliency of every non-king piece for `selected`, which may be any legal
/// move. Squares whose removal is illegal or whose evaluation fails are
/// reported as skipped; only a failure on the unperturbed position is fatal.
pub fn compute_board_saliency<O: QOracle<Position>>(
    pos: &Position,
    selected: Move,
    oracle: &mut O,
    method: Method,
    temperature: f64,
) -> Result<BoardSaliency, BoardSaliencyError<O::Error>> {
    let original = prepare(pos, selected, oracle)?;
    let selected_name = selected.to_string();
    let scores = candidate_squares(pos)
        .into_iter()
        .map(|sq| (sq, score_square(pos, sq, &original, &selected_name, oracle, method, temperature)))
        .collect();
    Ok(BoardSaliency {
        fen: pos.to_fen(),
        selected: selected_name,
        method,
        original,
        scores,
    })
}

/// As [`compute_board_saliency`], spreading the perturbed evaluations over
/// the sessions of `pool`.
pub fn compute_board_saliency_pooled<O>(
    pos: &Position,
    selected: Move,
    pool: &SessionPool<O>,
    method: Method,
    temperature: f64,
) -> Result<BoardSaliency, BoardSaliencyError<O::Error>>
where
    O: QOracle<Position> + Send,
{
    let original = prepare(pos, selected, &mut *pool.lease())?;
    let selected_name = selected.to_string();
    let squares = candidate_squares(pos);
    let breakdowns = map_with_pool(pool, squares.len(), |oracle, i| {
        score_square(pos, squares[i], &original, &selected_name, oracle, method, temperature)
    });
    Ok(BoardSaliency {
        fen: pos.to_fen(),
        selected: selected_name,
        method,
        original,
        scores: squares.into_iter().zip(breakdowns).collect(),
    })
}
