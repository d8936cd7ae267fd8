use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sarfa_chess::{Color, PieceKind, Position, SaliencyDatasetEntry, Square};
use sarfa_core::{QOracle, QProfile};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("position {0} is not derived from any known puzzle")]
    UnknownPosition(String),
    #[error("position {0} has no legal moves")]
    NoLegalMoves(String),
}

fn board(pos: &Position) -> Vec<(Square, char)> {
    pos.occupied().map(|(s, p)| (s, p.to_char())).collect()
}

/// Oracle for a labeled dataset whose value for each puzzle's best move is
/// one plus the number of its labeled squares still holding their piece.
/// Every other legal move is worth 0. Positions are matched to the puzzle
/// they were derived from by piece removal.
#[derive(Debug, Clone)]
pub struct PlantedOracle {
    puzzles: Vec<(Vec<(Square, char)>, Color, String, BTreeSet<Square>)>,
}

impl PlantedOracle {
    pub fn new(entries: &[SaliencyDatasetEntry]) -> Result<Self, String> {
        let puzzles = entries
            .iter()
            .map(|e| {
                let pos = e.position()?;
                Ok((board(&pos), pos.side_to_move(), e.best_move.clone(), e.salient_squares.clone()))
            })
            .collect::<Result<_, String>>()?;
        Ok(PlantedOracle { puzzles })
    }

    /// Best move and planted value for `pos`.
    pub fn planted_value(&self, pos: &Position) -> Result<(String, f64), SyntheticError> {
        let here = board(pos);
        let (original, _, best, salient) = self
            .puzzles
            .iter()
            .filter(|(b, side, _, _)| *side == pos.side_to_move() && here.iter().all(|p| b.contains(p)))
            .min_by_key(|(b, ..)| b.len())
            .ok_or_else(|| SyntheticError::UnknownPosition(pos.to_fen()))?;
        let kept = original.iter().filter(|p| salient.contains(&p.0) && here.contains(p)).count();
        Ok((best.clone(), 1.0 + kept as f64))
    }
}

impl QOracle<Position> for PlantedOracle {
    type Error = SyntheticError;

    fn evaluate(&mut self, pos: &Position) -> Result<QProfile, SyntheticError> {
        let (best, value) = self.planted_value(pos)?;
        let moves = pos.legal_moves();
        if moves.is_empty() {
            return Err(SyntheticError::NoLegalMoves(pos.to_fen()));
        }
        let entries = moves.iter().map(|m| {
            let name = m.to_string();
            let q = if name == best { value } else { 0.0 };
            (name, q)
        });
        Ok(QProfile::new(pos.to_fen(), entries).expect("legal moves are distinct and values finite"))
    }
}

/// Returns the same profile for every state.
#[derive(Debug, Clone)]
pub struct ConstantOracle(pub QProfile);

impl<S: ?Sized> QOracle<S> for ConstantOracle {
    type Error = std::convert::Infallible;

    fn evaluate(&mut self, _: &S) -> Result<QProfile, Self::Error> {
        Ok(self.0.clone())
    }
}

/// Puzzles from random playouts. The moving piece is always labeled; other
/// pieces are labeled at random, and any piece whose removal would make the
/// best move illegal is labeled too, so that unlabeled removals never change
/// the planted value. Labeled pieces are always removable and leave at least
/// one other move legal.
pub fn planted_dataset(n: usize, seed: u64) -> Vec<SaliencyDatasetEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut pos = Position::start();
        for _ in 0..rng.random_range(8..40) {
            let moves = pos.legal_moves();
            if moves.is_empty() {
                break;
            }
            pos = pos.play(moves[rng.random_range(0..moves.len())]).expect("legal move");
        }
        let moves = pos.legal_moves();
        if moves.len() < 2 {
            continue;
        }
        let best = moves[rng.random_range(0..moves.len())];
        // A labeled piece must be removable with some other move surviving,
        // otherwise its planted effect is invisible.
        let informative = |sq: Square| {
            pos.remove_piece(sq)
                .is_ok_and(|after| moves.iter().any(|m| *m != best && after.is_legal(*m)))
        };
        if !informative(best.from) {
            continue;
        }
        let mut salient = BTreeSet::from([best.from]);
        let mut negatives = 0;
        for (sq, piece) in pos.occupied() {
            if piece.kind == PieceKind::King || sq == best.from {
                continue;
            }
            let breaks_move = pos.remove_piece(sq).is_ok_and(|after| !after.is_legal(best));
            if breaks_move && !informative(sq) {
                salient.clear();
                break;
            }
            if breaks_move || (informative(sq) && rng.random_bool(0.25)) {
                salient.insert(sq);
            } else {
                negatives += 1;
            }
        }
        if salient.is_empty() || negatives == 0 {
            continue;
        }
        out.push(SaliencyDatasetEntry {
            fen: pos.to_fen(),
            best_move: best.to_string(),
            salient_squares: salient,
            expert_labels: None,
        });
    }
    out
}
